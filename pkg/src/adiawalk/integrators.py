"""One-step propagators for interpolating Hamiltonians.

Given H(s) = (1 - f(s)) H0 + f(s) H1 and a step size h, a walk operator
is one of

* ``exp``: W = exp(-i h H(s)),
* ``pf1``: W = exp(-i h f H1) exp(-i h (1-f) H0),
* ``pf2``: the Strang splitting exp(-i h (1-f) H0 / 2) exp(-i h f H1)
  exp(-i h (1-f) H0 / 2), with the schedule read at the step midpoint by
  default or at the left endpoint in the simplified variant,
* ``spf(p)``: the simplified p-th order splitting built from the
  Trotter-Suzuki fractal recursion, with every schedule evaluation at the
  step's left endpoint.

This module also computes the Hamiltonian-dependent constants (operator
norms, nested commutator sums, minimal gaps) that feed the recommended
step-size formulas, and provides a Cauchy-converged reference propagator
for local-truncation-error measurements.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .linalg import (
    HermitianOperator,
    UnitaryOperator,
    chain_product,
    expm_i_hermitian,
    operator_norm,
)
from .schedules import Schedule, schedule_values

SPF_ORDERS = (1, 2, 4, 6, 8)
COEFFICIENT_SUM_TOL = 1e-12
WALK_UNITARITY_TOL = 1e-10
MATERIALIZE_LIMIT = 2 ** 22  # complex entries held by an eager family
ORACLE_BLOCK = 2 ** 14
ORACLE_MAX_SUBSTEPS = 2 ** 22
ORACLE_PLATEAU = 1e-9  # roundoff allowance when substep halving stalls

__all__ = [
    "GaplessError",
    "IntegratorKind",
    "EXP_INTEGRATOR",
    "PF1",
    "PF2",
    "PF2_SIMPLIFIED",
    "spf",
    "parse_integrator_tag",
    "SplittingCoefficients",
    "suzuki_coefficients",
    "walk_operator",
    "WalkFamily",
    "build_walk_family",
    "walk_family_from_operators",
    "exact_step_propagator",
    "nested_commutator_sum",
    "commutator_combo",
    "ProblemConstants",
    "problem_constants",
    "recommended_step_size",
]


class GaplessError(RuntimeError):
    """Step-size selection requested for an interpolation with no gap."""


@dataclass(frozen=True)
class IntegratorKind:
    """Discretization method tag.

    ``order`` applies to the ``spf`` method only; ``midpoint`` applies to
    ``pf2`` only and selects where the schedule is read.
    """

    method: str
    order: int | None = None
    midpoint: bool = True

    def __post_init__(self):
        if self.method not in ("exp", "pf1", "pf2", "spf"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.method == "spf":
            if self.order not in SPF_ORDERS:
                raise ValueError(f"spf order must be one of {SPF_ORDERS}, got {self.order}")
        elif self.order is not None:
            raise ValueError(f"order only applies to spf, not {self.method}")

    @property
    def tag(self) -> str:
        if self.method == "spf":
            return f"spf{self.order}"
        if self.method == "pf2" and not self.midpoint:
            return "pf2-simplified"
        return self.method

    @property
    def effective_order(self) -> int:
        """Splitting order used by the step-size formulas."""
        if self.method == "exp":
            return 1
        if self.method == "pf1":
            return 1
        if self.method == "pf2":
            return 2
        return int(self.order)


EXP_INTEGRATOR = IntegratorKind("exp")
PF1 = IntegratorKind("pf1")
PF2 = IntegratorKind("pf2")
PF2_SIMPLIFIED = IntegratorKind("pf2", midpoint=False)


def spf(order: int) -> IntegratorKind:
    return IntegratorKind("spf", order=order)


def parse_integrator_tag(tag: str) -> IntegratorKind:
    if tag == "exp":
        return EXP_INTEGRATOR
    if tag == "pf1":
        return PF1
    if tag == "pf2":
        return PF2
    if tag == "pf2-simplified":
        return PF2_SIMPLIFIED
    if tag.startswith("spf"):
        try:
            return spf(int(tag[3:]))
        except ValueError as exc:
            raise ValueError(f"bad integrator tag {tag!r}") from exc
    raise ValueError(f"bad integrator tag {tag!r}")


@dataclass(frozen=True)
class SplittingCoefficients:
    """Stage weights (alpha_k, beta_k) of a splitting; both column sums 1."""

    stages: tuple

    def __post_init__(self):
        stages = tuple((float(a), float(b)) for a, b in self.stages)
        sa = sum(a for a, _ in stages)
        sb = sum(b for _, b in stages)
        if abs(sa - 1.0) > COEFFICIENT_SUM_TOL or abs(sb - 1.0) > COEFFICIENT_SUM_TOL:
            raise ValueError(f"stage sums off: sum(alpha) = {sa!r}, sum(beta) = {sb!r}")
        object.__setattr__(self, "stages", stages)

    def __len__(self) -> int:
        return len(self.stages)


@lru_cache(maxsize=8)
def suzuki_coefficients(order: int) -> SplittingCoefficients:
    """Fractal Trotter-Suzuki stages for even orders 2, 4, 6, 8.

    S_{2k}(h) = S_{2k-2}(u_k h)^2 S_{2k-2}((1-4u_k) h) S_{2k-2}(u_k h)^2
    with u_k = 1 / (4 - 4^{1/(2k-1)}); adjacent exponentials of the same
    operator are merged before the stage list is read off.
    """
    if order not in (2, 4, 6, 8):
        raise ValueError(f"supported orders are 2, 4, 6, 8, got {order}")
    seq = [(0, 0.5), (1, 1.0), (0, 0.5)]  # (operator index, weight in units of h)
    current = 2
    while current < order:
        current += 2
        uk = 1.0 / (4.0 - 4.0 ** (1.0 / (current - 1.0)))
        scaled = []
        for factor in (uk, uk, 1.0 - 4.0 * uk, uk, uk):
            scaled.extend((op, w * factor) for op, w in seq)
        merged = []
        for op, w in scaled:
            if merged and merged[-1][0] == op:
                merged[-1] = (op, merged[-1][1] + w)
            else:
                merged.append((op, w))
        seq = merged
    stages = []
    for i in range(0, len(seq), 2):
        op, w = seq[i]
        if op != 0:
            raise RuntimeError("splitting sequence lost its H0/H1 alternation")
        beta = seq[i + 1][1] if i + 1 < len(seq) else 0.0
        stages.append((w, beta))
    return SplittingCoefficients(tuple(stages))


# ---------------------------------------------------------------------------
# single walk operators

def _eig_pair(H0, H1):
    m0 = HermitianOperator(getattr(H0, "matrix", H0)).matrix
    m1 = HermitianOperator(getattr(H1, "matrix", H1)).matrix
    if m0.shape != m1.shape:
        raise ValueError(f"dimension mismatch: {m0.shape} vs {m1.shape}")
    w0, v0 = np.linalg.eigh(m0)
    w1, v1 = np.linalg.eigh(m1)
    return (w0, v0), (w1, v1)


def _phase_op(w, v, coeff: float) -> np.ndarray:
    return (v * np.exp(-1j * coeff * w)) @ v.conj().T


def walk_operator(
    H0,
    H1,
    sched: Schedule,
    kind: IntegratorKind,
    h: float,
    s: float,
    *,
    ds: float | None = None,
) -> UnitaryOperator:
    """One walk operator W(s) at step size h.

    ``ds`` is the step in schedule time (1/T_d for a family) and is only
    required by the midpoint pf2 variant.
    """
    if not (np.isfinite(h) and h > 0):
        raise ValueError(f"step size must be positive, got {h}")
    (w0, v0), (w1, v1) = _eig_pair(H0, H1)

    if kind.method == "exp":
        f, _, _ = schedule_values(sched, float(s))
        m0 = (v0 * w0) @ v0.conj().T
        m1 = (v1 * w1) @ v1.conj().T
        hs = (1.0 - f) * m0 + f * m1
        return expm_i_hermitian(HermitianOperator(hs), h)

    if kind.method == "pf2":
        if kind.midpoint:
            if ds is None:
                raise ValueError("midpoint pf2 needs the step ds = 1/T_d")
            s_eval = min(float(s) + float(ds) / 2.0, 1.0)
        else:
            s_eval = float(s)
        f, _, _ = schedule_values(sched, s_eval)
        e0h = _phase_op(w0, v0, h * (1.0 - f) / 2.0)
        e1 = _phase_op(w1, v1, h * f)
        return UnitaryOperator(e0h @ e1 @ e0h)

    f, _, _ = schedule_values(sched, float(s))
    if kind.method == "pf1" or (kind.method == "spf" and kind.order == 1):
        e0 = _phase_op(w0, v0, h * (1.0 - f))
        e1 = _phase_op(w1, v1, h * f)
        return UnitaryOperator(e1 @ e0)

    stages = suzuki_coefficients(int(kind.order)).stages
    acc = None
    for alpha, beta in stages:
        e0 = _phase_op(w0, v0, h * alpha * (1.0 - f))
        acc = e0 if acc is None else acc @ e0
        if beta != 0.0:
            acc = acc @ _phase_op(w1, v1, h * beta * f)
    return UnitaryOperator(acc)


# ---------------------------------------------------------------------------
# walk families

@dataclass
class WalkFamily:
    """Grid {W(j/T_d)} for j = 0..T_d, possibly built lazily in blocks.

    ``walks`` materializes the whole stack; ``block(j0, j1)`` builds the
    sub-stack for steps j0..j1-1, which keeps very long evolutions out of
    memory.  Treat instances as immutable.
    """

    td: int
    h: float
    dim: int
    kind: IntegratorKind | None = None
    h0: HermitianOperator | None = None
    h1: HermitianOperator | None = None
    schedule: Schedule | None = None
    _walks: np.ndarray | None = field(default=None, repr=False)
    _eig: tuple | None = field(default=None, repr=False)

    @property
    def s_grid(self) -> np.ndarray:
        return np.arange(self.td + 1) / self.td

    def _eig_cache(self):
        if self._eig is None:
            self._eig = _eig_pair(self.h0, self.h1)
        return self._eig

    def _build_block(self, s: np.ndarray) -> np.ndarray:
        kind = self.kind
        h = self.h
        if kind.method == "exp":
            f = schedule_values(self.schedule, s)[0]
            m0 = self.h0.matrix
            m1 = self.h1.matrix
            hs = (1.0 - f)[:, None, None] * m0 + f[:, None, None] * m1
            w, v = np.linalg.eigh(hs)
            ph = np.exp(-1j * h * w)
            return np.einsum("nik,nk,njk->nij", v, ph, v.conj())

        (w0, v0), (w1, v1) = self._eig_cache()
        if kind.method == "pf2":
            s_eval = s + (1.0 / (2.0 * self.td) if kind.midpoint else 0.0)
            f = schedule_values(self.schedule, np.minimum(s_eval, 1.0))[0]
            ph0h = np.exp(-1j * h * np.outer(1.0 - f, w0) / 2.0)
            ph1 = np.exp(-1j * h * np.outer(f, w1))
            e0h = np.einsum("ik,nk,jk->nij", v0, ph0h, v0.conj())
            e1 = np.einsum("ik,nk,jk->nij", v1, ph1, v1.conj())
            return e0h @ e1 @ e0h

        f = schedule_values(self.schedule, s)[0]
        if kind.method == "pf1" or (kind.method == "spf" and kind.order == 1):
            ph0 = np.exp(-1j * h * np.outer(1.0 - f, w0))
            ph1 = np.exp(-1j * h * np.outer(f, w1))
            e0 = np.einsum("ik,nk,jk->nij", v0, ph0, v0.conj())
            e1 = np.einsum("ik,nk,jk->nij", v1, ph1, v1.conj())
            return e1 @ e0

        stages = suzuki_coefficients(int(kind.order)).stages
        acc = None
        for alpha, beta in stages:
            ph0 = np.exp(-1j * h * alpha * np.outer(1.0 - f, w0))
            e0 = np.einsum("ik,nk,jk->nij", v0, ph0, v0.conj())
            acc = e0 if acc is None else acc @ e0
            if beta != 0.0:
                ph1 = np.exp(-1j * h * beta * np.outer(f, w1))
                acc = acc @ np.einsum("ik,nk,jk->nij", v1, ph1, v1.conj())
        return acc

    def block(self, j0: int, j1: int) -> np.ndarray:
        """Walk operators at steps j0..j1-1 as an (j1-j0, dim, dim) stack."""
        if not 0 <= j0 < j1 <= self.td + 1:
            raise ValueError(f"bad block range [{j0}, {j1}) for td = {self.td}")
        if self._walks is not None:
            return self._walks[j0:j1]
        s = np.arange(j0, j1) / self.td
        ws = self._build_block(s)
        dev = float(np.max(np.abs(ws.conj().transpose(0, 2, 1) @ ws - np.eye(self.dim))))
        if dev > WALK_UNITARITY_TOL:
            raise RuntimeError(f"walk block lost unitarity: deviation {dev:.3e}")
        return ws

    def walk(self, j: int) -> np.ndarray:
        return self.block(j, j + 1)[0]

    @property
    def walks(self) -> np.ndarray:
        if self._walks is None:
            self._walks = self.block(0, self.td + 1)
        return self._walks


def build_walk_family(
    H0,
    H1,
    sched: Schedule,
    kind: IntegratorKind,
    h: float,
    td: int,
    *,
    materialize: bool | None = None,
) -> WalkFamily:
    """Family of walk operators on the inclusive grid s = j/td, j = 0..td."""
    if td < 1:
        raise ValueError(f"need td >= 1, got {td}")
    if not (np.isfinite(h) and h > 0):
        raise ValueError(f"step size must be positive, got {h}")
    h0 = H0 if isinstance(H0, HermitianOperator) else HermitianOperator(H0)
    h1 = H1 if isinstance(H1, HermitianOperator) else HermitianOperator(H1)
    if h0.dim != h1.dim:
        raise ValueError(f"dimension mismatch: {h0.dim} vs {h1.dim}")
    fam = WalkFamily(td=td, h=float(h), dim=h0.dim, kind=kind, h0=h0, h1=h1, schedule=sched)
    if materialize is None:
        materialize = (td + 1) * h0.dim * h0.dim <= MATERIALIZE_LIMIT
    if materialize:
        fam.walks  # noqa: B018  (builds and caches the full stack)
    return fam


def walk_family_from_operators(walks, h: float = 1.0) -> WalkFamily:
    """Wrap an explicit stack of unitaries (step j at index j) as a family."""
    ws = np.asarray(walks, dtype=complex)
    if ws.ndim != 3 or ws.shape[1] != ws.shape[2] or ws.shape[0] < 2:
        raise ValueError(f"expected a stack of at least 2 square matrices, got {ws.shape}")
    dev = float(np.max(np.abs(ws.conj().transpose(0, 2, 1) @ ws - np.eye(ws.shape[1]))))
    if dev > WALK_UNITARITY_TOL:
        raise ValueError(f"entry not unitary: deviation {dev:.3e}")
    return WalkFamily(td=ws.shape[0] - 1, h=float(h), dim=ws.shape[1], _walks=ws)


# ---------------------------------------------------------------------------
# reference propagator

def exact_step_propagator(
    H0,
    H1,
    sched: Schedule,
    h: float,
    s: float,
    ds: float,
    *,
    tol: float = 1e-12,
    max_substeps: int = ORACLE_MAX_SUBSTEPS,
) -> np.ndarray:
    """Time-ordered propagator over schedule window [s, s+ds], duration h.

    Computed by midpoint Strang substeps with the substep count doubled
    until successive results agree below ``tol``.  A doubling that stops
    shrinking while already below the roundoff allowance is accepted as
    the plateau; anything else short of ``tol`` raises.  Per-substep
    construction error grows linearly in the substep count, so the
    allowance cannot be pushed to the convergence tolerance itself.
    """
    (w0, v0), (w1, v1) = _eig_pair(H0, H1)

    def chain(m: int) -> np.ndarray:
        hs = h / m
        acc = np.eye(len(w0), dtype=complex)
        for k0 in range(0, m, ORACLE_BLOCK):
            k1 = min(k0 + ORACLE_BLOCK, m)
            k = np.arange(k0, k1)
            smid = s + ds * (k + 0.5) / m
            f = schedule_values(sched, np.minimum(smid, 1.0))[0]
            ph0h = np.exp(-1j * hs * np.outer(1.0 - f, w0) / 2.0)
            ph1 = np.exp(-1j * hs * np.outer(f, w1))
            e0h = np.einsum("ik,nk,jk->nij", v0, ph0h, v0.conj())
            e1 = np.einsum("ik,nk,jk->nij", v1, ph1, v1.conj())
            acc = chain_product(e0h @ e1 @ e0h) @ acc
        return acc

    prev = chain(1)
    dprev = None
    m = 2
    while m <= max_substeps:
        cur = chain(m)
        d = operator_norm(cur - prev)
        if d < tol:
            return cur
        if dprev is not None and d <= ORACLE_PLATEAU and d >= dprev / 2.0:
            return cur  # halving stalled at the roundoff floor
        prev = cur
        dprev = d
        m *= 2
    raise RuntimeError(
        f"substep doubling stalled at difference {dprev:.3e} without reaching {tol:.0e}"
    )


# ---------------------------------------------------------------------------
# problem constants and step-size rules

def nested_commutator_sum(H0, H1, p: int) -> float:
    """Sum over gamma in {0,1}^(p+1) of ||[H_{gamma_p}, ..., [H_{gamma_1}, H_{gamma_0}]]||."""
    if not 1 <= p <= 6:
        raise ValueError(f"supported p is 1..6, got {p}")
    m = (
        HermitianOperator(getattr(H0, "matrix", H0)).matrix,
        HermitianOperator(getattr(H1, "matrix", H1)).matrix,
    )
    total = 0.0
    for gamma in itertools.product((0, 1), repeat=p + 1):
        term = m[gamma[0]]
        for g in gamma[1:]:
            term = m[g] @ term - term @ m[g]
        total += operator_norm(term)
    return total


def commutator_combo(H0, H1) -> float:
    """2 ||[H1, [H1, H0]]|| + ||[H0, [H0, H1]]||, the second-order width."""
    m0 = HermitianOperator(getattr(H0, "matrix", H0)).matrix
    m1 = HermitianOperator(getattr(H1, "matrix", H1)).matrix
    c = m0 @ m1 - m1 @ m0
    c110 = m1 @ (-c) - (-c) @ m1  # [H1, [H1, H0]]
    c001 = m0 @ c - c @ m0  # [H0, [H0, H1]]
    return 2.0 * operator_norm(c110) + operator_norm(c001)


@dataclass(frozen=True)
class ProblemConstants:
    """Norm, gap, and commutator data of one interpolation problem."""

    alpha: float
    delta_star: float
    comm_combo: float
    alpha_tilde: dict

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.delta_star > 2.0 * self.alpha + 1e-9:
            raise ValueError(
                f"delta_star = {self.delta_star} exceeds 2 alpha = {2 * self.alpha}"
            )
        object.__setattr__(self, "alpha_tilde", dict(self.alpha_tilde))


def problem_constants(
    H0,
    H1,
    sched: Schedule,
    *,
    grid: int = 1000,
    orders: tuple = (1, 2, 4),
) -> ProblemConstants:
    """Measure alpha, the minimal ground gap of H(s) over the grid, and
    the commutator sums needed by the step-size rules."""
    h0 = HermitianOperator(getattr(H0, "matrix", H0))
    h1 = HermitianOperator(getattr(H1, "matrix", H1))
    alpha = operator_norm(h0) + operator_norm(h1)
    s = np.linspace(0.0, 1.0, grid + 1)
    f = schedule_values(sched, s)[0]
    hs = (1.0 - f)[:, None, None] * h0.matrix + f[:, None, None] * h1.matrix
    w = np.linalg.eigvalsh(hs)
    delta_star = float(np.min(w[:, 1] - w[:, 0]))
    tilde = {int(p): nested_commutator_sum(h0, h1, int(p)) for p in orders if p <= 6}
    return ProblemConstants(
        alpha=alpha,
        delta_star=delta_star,
        comm_combo=commutator_combo(h0, h1),
        alpha_tilde=tilde,
    )


def recommended_step_size(consts: ProblemConstants, kind: IntegratorKind) -> float:
    """Step size from the closed-form rules, with all order constants 1.

    The returned h is a scaling recommendation, not a certified bound;
    pair it with a measured gap check.
    """
    if consts.alpha <= 0:
        raise ValueError("alpha must be positive")
    if consts.delta_star <= 0:
        raise GaplessError(
            "minimal Hamiltonian gap is nonpositive; no step-size rule applies"
        )
    base = 1.0 / consts.alpha
    if kind.method == "exp":
        return base
    if kind.effective_order <= 2:
        cc = consts.comm_combo
        if cc <= 0:
            return base
        return min(base, math.sqrt(95.0 * consts.delta_star / (2.0 * cc)))
    p = kind.effective_order
    if p not in consts.alpha_tilde:
        raise ValueError(f"constants lack the order-{p} commutator sum")
    at = consts.alpha_tilde[p]
    if at <= 0:
        return base
    return min(base, (consts.delta_star / at) ** (1.0 / p))
