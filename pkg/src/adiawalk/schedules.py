"""Scheduling functions f: [0,1] -> [0,1] with first and second derivatives.

Implemented kinds:

* ``linear``: f(s) = s.
* ``glue``: the normalized bump integral g(s) = ce^{-1} int_0^s
  exp(-1/(t(1-t))) dt, whose derivatives of every order vanish at both
  endpoints.
* ``bc-composite``: two glue functions joined symmetrically at s = 1/2,
  so all derivatives also vanish at the midpoint from both sides.
* ``grover-power``: the gap-adapted search schedule solving
  f'(s) = d_{N,p} * Delta(f)^p for the two-level search gap
  Delta(f) = sqrt((1-2f)^2 (1-mu) + mu) with mu = 1/N.  p = 1 has a
  closed form; 1 < p < 2 is tabulated by quadrature of the inverse map
  and inverted by bisection.
* ``tabulated``: monotone (s, f) samples with interpolated values and
  finite-difference derivatives, for diagnostics.

All schedules satisfy f(0) = 0 and f(1) = 1 to 1e-10 and are monotone
nondecreasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

GLUE_SEGMENTS = 4096
GLUE_GL_POINTS = 20
POWER_SEGMENTS = 4096
POWER_REFINE = 4
POWER_GL_POINTS = 10
POWER_BISECTIONS = 48
FD_SPACING = 1e-5
ENDPOINT_TOL = 1e-10

SCHEDULE_KINDS = ("linear", "glue", "bc-composite", "grover-power", "tabulated")

__all__ = [
    "Schedule",
    "ScheduleSample",
    "SCHEDULE_KINDS",
    "linear_schedule",
    "glue_schedule",
    "bc_composite_schedule",
    "build_grover_schedule",
    "tabulated_schedule",
    "eval_schedule",
    "schedule_values",
    "glue_constant_ce",
    "grover_d_constant",
    "grover_gap_of_f",
    "schedule_to_dict",
    "schedule_from_dict",
]


# ---------------------------------------------------------------------------
# glue function machinery

def _glue_integrand(t):
    t = np.asarray(t, dtype=float)
    u = t * (1.0 - t)
    out = np.zeros_like(u)
    pos = u > 0
    # exp(-1/u) underflows to 0 near the endpoints; that is the intended value
    out[pos] = np.exp(-1.0 / u[pos])
    return out


@lru_cache(maxsize=1)
def _glue_table():
    nodes, wts = np.polynomial.legendre.leggauss(GLUE_GL_POINTS)
    edges = np.linspace(0.0, 1.0, GLUE_SEGMENTS + 1)
    mids = (edges[:-1] + edges[1:]) / 2
    halfs = np.diff(edges) / 2
    pts = mids[:, None] + halfs[:, None] * nodes[None, :]
    seg = (halfs[:, None] * wts[None, :] * _glue_integrand(pts)).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return edges, cum, float(cum[-1])


def glue_constant_ce() -> float:
    """The normalizer ce = int_0^1 exp(-1/(s(1-s))) ds, cached."""
    return _glue_table()[2]


def _glue_cumulative(s: np.ndarray) -> np.ndarray:
    """Unnormalized int_0^s of the glue integrand, piecewise Gauss-Legendre."""
    edges, cum, _ = _glue_table()
    nodes, wts = np.polynomial.legendre.leggauss(GLUE_GL_POINTS)
    idx = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, GLUE_SEGMENTS - 1)
    a = edges[idx]
    mids = (a + s) / 2
    halfs = (s - a) / 2
    pts = mids[:, None] + halfs[:, None] * nodes[None, :]
    partial = (halfs[:, None] * wts[None, :] * _glue_integrand(pts)).sum(axis=1)
    return cum[idx] + partial


def _glue_values(s: np.ndarray):
    """(g, g', g'') of the normalized glue function on array input."""
    total = glue_constant_ce()
    g = _glue_cumulative(s) / total
    integ = _glue_integrand(s)
    gp = integ / total
    u = s * (1.0 - s)
    gpp = np.zeros_like(s)
    pos = u > 0
    gpp[pos] = integ[pos] * (1.0 - 2.0 * s[pos]) / (u[pos] ** 2) / total
    return g, gp, gpp


# ---------------------------------------------------------------------------
# search-schedule machinery (effective two-level gap, mu = 1/N)

def grover_gap_of_f(f, mu: float):
    """Two-level search gap sqrt((1-2f)^2 (1-mu) + mu) as a function of f."""
    f = np.asarray(f, dtype=float)
    return np.sqrt((1.0 - 2.0 * f) ** 2 * (1.0 - mu) + mu)


def _d_constant_p1(n: int) -> float:
    return math.sqrt(n / (n - 1.0)) * math.log(math.sqrt(n) + math.sqrt(n - 1.0))


@lru_cache(maxsize=64)
def _power_table(n: int, p: float):
    """f-grid edges, normalized s nodes, and the normalizer d for 1 < p < 2.

    The f grid has POWER_SEGMENTS uniform segments, refined 4x inside the
    window |f - 1/2| < 2/sqrt(n) where the gap minimum lives.  s(f) is the
    cumulative Gauss-Legendre integral of Delta^{-p}, normalized by its
    total, which is exactly d_{n,p}.
    """
    mu = 1.0 / n
    window = 2.0 / math.sqrt(n)
    base = np.linspace(0.0, 1.0, POWER_SEGMENTS + 1)
    pieces = [np.array([0.0])]
    for a, b in zip(base[:-1], base[1:]):
        if b > 0.5 - window and a < 0.5 + window:
            pieces.append(np.linspace(a, b, POWER_REFINE + 1)[1:])
        else:
            pieces.append(np.array([b]))
    f_edges = np.concatenate(pieces)

    nodes, wts = np.polynomial.legendre.leggauss(POWER_GL_POINTS)
    mids = (f_edges[:-1] + f_edges[1:]) / 2
    halfs = np.diff(f_edges) / 2
    pts = mids[:, None] + halfs[:, None] * nodes[None, :]
    seg = (halfs[:, None] * wts[None, :] * grover_gap_of_f(pts, mu) ** (-p)).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    d = float(cum[-1])
    s_nodes = cum / d
    s_nodes[-1] = 1.0
    return f_edges, s_nodes, d


def grover_d_constant(n: int, p: float = 1.0) -> float:
    """Normalization constant of the power-p search schedule (closed form
    at p = 1, quadrature of int_0^1 Delta(f)^{-p} df otherwise)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 1.0 <= p < 2.0:
        raise ValueError(f"power p must lie in [1, 2), got {p}")
    if p == 1.0:
        return _d_constant_p1(n)
    return _power_table(int(n), float(p))[2]


def _power_values_p1(s: np.ndarray, mu: float):
    d1 = math.asinh(math.sqrt((1.0 - mu) / mu)) / math.sqrt(1.0 - mu)
    rate = 2.0 * math.sqrt(1.0 - mu) * d1
    arg = rate * (s - 0.5)
    amp = math.sqrt(mu) / (2.0 * math.sqrt(1.0 - mu))
    f = 0.5 + amp * np.sinh(arg)
    df = math.sqrt(mu) * d1 * np.cosh(arg)
    d2f = 2.0 * math.sqrt(mu * (1.0 - mu)) * d1 * d1 * np.sinh(arg)
    return np.clip(f, 0.0, 1.0), df, d2f


def _power_partial(f_lo, f_hi, mu: float, p: float):
    """Gauss-Legendre integral of Delta^{-p} over [f_lo, f_hi], vectorized."""
    nodes, wts = np.polynomial.legendre.leggauss(POWER_GL_POINTS)
    mids = (f_lo + f_hi) / 2
    halfs = (f_hi - f_lo) / 2
    pts = mids[..., None] + halfs[..., None] * nodes
    vals = grover_gap_of_f(pts, mu) ** (-p)
    return (halfs[..., None] * wts * vals).sum(axis=-1)


def _power_values_tabulated(s: np.ndarray, n: int, p: float):
    f_edges, s_nodes, d = _power_table(n, p)
    mu = 1.0 / n
    idx = np.clip(np.searchsorted(s_nodes, s, side="right") - 1, 0, len(s_nodes) - 2)
    lo = f_edges[idx]
    hi = f_edges[idx + 1]
    target = (s - s_nodes[idx]) * d
    base_lo = np.copy(lo)
    for _ in range(POWER_BISECTIONS):
        mid = (lo + hi) / 2
        val = _power_partial(base_lo, mid, mu, p)
        take = val <= target
        lo = np.where(take, mid, lo)
        hi = np.where(take, hi, mid)
    f = (lo + hi) / 2
    gap = grover_gap_of_f(f, mu)
    df = d * gap ** p
    # chain rule through the defining ODE: f'' = d^2 p Delta^{2p-1} dDelta/df
    d2f = -2.0 * d * d * p * (1.0 - 2.0 * f) * (1.0 - mu) * gap ** (2.0 * p - 2.0)
    return np.clip(f, 0.0, 1.0), df, d2f


# ---------------------------------------------------------------------------
# schedule objects

@dataclass(frozen=True)
class ScheduleSample:
    """Value and first two derivatives of a schedule at one point."""

    f: float
    df: float
    d2f: float

    def __post_init__(self):
        if self.df < -1e-12:
            raise ValueError(f"schedule derivative must be nonnegative, got {self.df}")
        object.__setattr__(self, "df", max(self.df, 0.0))


@dataclass(frozen=True)
class Schedule:
    """Immutable schedule; evaluate with eval_schedule or schedule_values."""

    kind: str
    parameters: dict = field(default_factory=dict)
    _table: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; valid: {SCHEDULE_KINDS}")
        params = dict(self.parameters)
        if self.kind in ("linear", "glue", "bc-composite"):
            if params:
                raise ValueError(f"{self.kind} schedule takes no parameters, got {params}")
        elif self.kind == "grover-power":
            extra = set(params) - {"N", "p"}
            if extra:
                raise ValueError(f"unexpected grover-power parameters: {sorted(extra)}")
            n = int(params.get("N", 0))
            p = float(params.get("p", 1.0))
            if n < 2:
                raise ValueError(f"need N >= 2, got {n}")
            if not 1.0 <= p < 2.0:
                raise ValueError(f"power p must lie in [1, 2), got {p}")
            params = {"N": n, "p": p}
            if p > 1.0 and self._table is None:
                object.__setattr__(self, "_table", _power_table(n, p))
        elif self.kind == "tabulated":
            extra = set(params) - {"s", "f"}
            if extra:
                raise ValueError(f"unexpected tabulated parameters: {sorted(extra)}")
            s = np.asarray(params.get("s", ()), dtype=float)
            f = np.asarray(params.get("f", ()), dtype=float)
            if s.ndim != 1 or s.shape != f.shape or len(s) < 2:
                raise ValueError("tabulated schedule needs matching 1-d s and f arrays")
            if np.any(np.diff(s) <= 0):
                raise ValueError("tabulated s grid must be strictly increasing")
            if np.any(np.diff(f) < 0):
                raise ValueError("tabulated f values must be nondecreasing")
            params = {"s": tuple(map(float, s)), "f": tuple(map(float, f))}
            object.__setattr__(self, "_table", (s, f))
        object.__setattr__(self, "parameters", params)

        f0 = _eval_array(self, np.array([0.0]))[0][0]
        f1 = _eval_array(self, np.array([1.0]))[0][0]
        if abs(f0) > ENDPOINT_TOL or abs(f1 - 1.0) > ENDPOINT_TOL:
            raise ValueError(f"schedule endpoints off: f(0) = {f0:.3e}, f(1) = {f1:.12f}")


def linear_schedule() -> Schedule:
    return Schedule("linear")


def glue_schedule() -> Schedule:
    return Schedule("glue")


def bc_composite_schedule() -> Schedule:
    return Schedule("bc-composite")


def build_grover_schedule(n: int, p: float = 1.0) -> Schedule:
    """Gap-adapted search schedule for an unstructured-search instance of
    size n (single marked state), with power p in [1, 2)."""
    return Schedule("grover-power", {"N": int(n), "p": float(p)})


def tabulated_schedule(s, f) -> Schedule:
    return Schedule("tabulated", {"s": tuple(map(float, s)), "f": tuple(map(float, f))})


def _tabulated_f(table, s: np.ndarray) -> np.ndarray:
    s_grid, f_grid = table
    return np.interp(s, s_grid, f_grid)


def _eval_array(sched: Schedule, s: np.ndarray):
    if sched.kind == "linear":
        return s.copy(), np.ones_like(s), np.zeros_like(s)
    if sched.kind == "glue":
        return _glue_values(s)
    if sched.kind == "bc-composite":
        f = np.empty_like(s)
        df = np.empty_like(s)
        d2f = np.empty_like(s)
        left = s <= 0.5
        gl, gpl, gppl = _glue_values(2.0 * s[left])
        f[left] = gl / 2
        df[left] = gpl
        d2f[left] = 2.0 * gppl
        right = ~left
        gr, gpr, gppr = _glue_values(2.0 * s[right] - 1.0)
        f[right] = 0.5 + gr / 2
        df[right] = gpr
        d2f[right] = 2.0 * gppr
        return f, df, d2f
    if sched.kind == "grover-power":
        n = sched.parameters["N"]
        p = sched.parameters["p"]
        if p == 1.0:
            return _power_values_p1(s, 1.0 / n)
        return _power_values_tabulated(s, n, p)
    if sched.kind == "tabulated":
        table = sched._table
        delta = FD_SPACING
        f = _tabulated_f(table, s)
        c = np.clip(s, delta, 1.0 - delta)
        fp = _tabulated_f(table, c + delta)
        fm = _tabulated_f(table, c - delta)
        fc = _tabulated_f(table, c)
        df = (fp - fm) / (2.0 * delta)
        d2f = (fp - 2.0 * fc + fm) / (delta * delta)
        return f, df, d2f
    raise ValueError(f"unknown schedule kind {sched.kind!r}")


def schedule_values(sched: Schedule, s):
    """Vectorized (f, f', f'') over an array of s values in [0, 1]."""
    s = np.asarray(s, dtype=float)
    flat = np.atleast_1d(s).astype(float).ravel()
    if flat.size and (flat.min() < -1e-12 or flat.max() > 1.0 + 1e-12):
        raise ValueError(
            f"schedule argument outside [0, 1]: range [{flat.min()}, {flat.max()}]"
        )
    flat = np.clip(flat, 0.0, 1.0)
    f, df, d2f = _eval_array(sched, flat)
    if s.ndim == 0:
        return float(f[0]), float(df[0]), float(d2f[0])
    return f.reshape(s.shape), df.reshape(s.shape), d2f.reshape(s.shape)


def eval_schedule(sched: Schedule, s: float) -> ScheduleSample:
    """Evaluate one point; raises ValueError outside [0, 1]."""
    f, df, d2f = schedule_values(sched, float(s))
    return ScheduleSample(f=f, df=df, d2f=d2f)


def schedule_to_dict(sched: Schedule) -> dict:
    return {"kind": sched.kind, "parameters": dict(sched.parameters)}


def schedule_from_dict(data: dict) -> Schedule:
    extra = set(data) - {"kind", "parameters"}
    if extra:
        raise ValueError(f"unexpected schedule keys: {sorted(extra)}")
    return Schedule(data["kind"], dict(data.get("parameters", {})))
