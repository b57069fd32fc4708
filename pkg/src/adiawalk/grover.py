"""Unstructured search in the two-dimensional invariant subspace.

With m marked items out of n, the dynamics of the search Hamiltonians
stays in the span of the marked subspace |e0> and its complement |e1>
inside the uniform superposition's plane.  Everything here works with
that 2x2 reduction, so n up to 2**60 costs the same as n = 4: walk
entries, angular gaps, schedule-driven searches, their QAOA angle
export, and the step-count scaling experiment.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import HermitianOperator, chain_product
from .schedules import (
    Schedule,
    bc_composite_schedule,
    build_grover_schedule,
    grover_d_constant,
    linear_schedule,
    schedule_values,
)

SEARCH_BLOCK = 65536
THRESHOLD_FACTOR = 12.0
SCALING_CAP = 10 ** 8

__all__ = [
    "ThresholdWarning",
    "GroverInstance",
    "effective_hamiltonians",
    "gap_closed_forms",
    "walk_closed_form",
    "SearchResult",
    "run_search",
    "QaoaAngleSet",
    "qaoa_angles",
    "qaoa_replay",
    "ScalingCell",
    "scaling_experiment",
]


class ThresholdWarning(UserWarning):
    """Requested step count sits below the asymptotic-regime threshold."""


@dataclass(frozen=True)
class GroverInstance:
    """Search with m marked items among n; kept exactly with integers."""

    n: int
    m: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one marked item")
        if self.n < 2 * self.m:
            raise ValueError(f"need n >= 2m, got n = {self.n}, m = {self.m}")

    @property
    def mu(self) -> float:
        return self.m / self.n


def effective_hamiltonians(inst: GroverInstance):
    """2x2 reduction of the search pair in the (|e0>, |e1>) basis.

    H0 = I - |u><u| with |u> = (sqrt(mu), sqrt(1-mu)) the uniform
    superposition, H1 the projector off the marked subspace.
    """
    mu = inst.mu
    c = math.sqrt(mu * (1.0 - mu))
    h0 = HermitianOperator(np.array([[1.0 - mu, -c], [-c, mu]]))
    h1 = HermitianOperator(np.diag([0.0, 1.0]))
    return h0, h1


def gap_closed_forms(inst: GroverInstance, f, h: float = 1.0):
    """Hamiltonian gap and the walk's angular gap, in closed form.

    ``f`` may be a scalar or an array.  The walk gap is for the
    first-order splitting at step size h (the second-order splitting
    shares the same eigenphases).
    """
    f = np.asarray(f, dtype=float)
    mu = inst.mu
    gap_h = np.sqrt((1.0 - 2.0 * f) ** 2 * (1.0 - mu) + mu)
    xi = mu * np.cos(h / 2.0) + (1.0 - mu) * np.cos(h * (0.5 - f))
    arc = 2.0 * np.arccos(np.clip(xi, -1.0, 1.0))
    gap_w = np.minimum(arc, 2.0 * np.pi - arc)
    if f.ndim == 0:
        return float(gap_h), float(gap_w)
    return gap_h, gap_w


def walk_closed_form(inst: GroverInstance, f, h: float = 1.0) -> np.ndarray:
    """First-order walk operator entries; batched over an array of f."""
    f = np.asarray(f, dtype=float)
    mu = inst.mu
    c = math.sqrt(mu * (1.0 - mu))
    e = np.exp(-1j * h * (1.0 - f))
    ph1 = np.exp(-1j * h * f)
    w = np.empty((*f.shape, 2, 2), dtype=complex)
    w[..., 0, 0] = e + (1.0 - e) * mu
    w[..., 0, 1] = (1.0 - e) * c
    w[..., 1, 0] = ph1 * (1.0 - e) * c
    w[..., 1, 1] = ph1 * (e + (1.0 - e) * (1.0 - mu))
    return w


def _search_state(inst: GroverInstance, sched: Schedule, t: int) -> np.ndarray:
    mu = inst.mu
    psi = np.array([math.sqrt(mu), math.sqrt(1.0 - mu)], dtype=complex)
    for j0 in range(0, t, SEARCH_BLOCK):
        j1 = min(j0 + SEARCH_BLOCK, t)
        f = schedule_values(sched, np.arange(j0, j1) / t)[0]
        psi = chain_product(walk_closed_form(inst, f)) @ psi
    return psi


def _replay_state(inst: GroverInstance, gammas: np.ndarray) -> np.ndarray:
    mu = inst.mu
    psi = np.array([math.sqrt(mu), math.sqrt(1.0 - mu)], dtype=complex)
    for j0 in range(0, len(gammas), SEARCH_BLOCK):
        f = gammas[j0:j0 + SEARCH_BLOCK]
        psi = chain_product(walk_closed_form(inst, f)) @ psi
    return psi


@dataclass(frozen=True)
class SearchResult:
    """Final reduced state; ``error`` is its distance from the marked
    subspace and ``success`` the marked-subspace probability."""

    final_state: np.ndarray
    error: float
    success: float


def _result_from_state(psi: np.ndarray) -> SearchResult:
    success = float(np.abs(psi[0]) ** 2)
    return SearchResult(
        final_state=psi,
        error=float(math.sqrt(max(1.0 - success, 0.0))),
        success=success,
    )


def _maybe_warn_threshold(sched: Schedule, t: int):
    if sched.kind != "grover-power":
        return
    n = int(sched.parameters["N"])
    p = float(sched.parameters["p"])
    threshold = THRESHOLD_FACTOR * grover_d_constant(n, p)
    if t < threshold:
        warnings.warn(
            f"step count {t} is below the schedule's regime threshold "
            f"{threshold:.1f}; the scaling guarantees do not apply",
            ThresholdWarning,
            stacklevel=3,
        )


def run_search(inst: GroverInstance, sched: Schedule, t: int) -> SearchResult:
    """Drive the first-order walk at h = 1 for t steps, f read at j/t."""
    if t < 1:
        raise ValueError(f"need at least one step, got {t}")
    _maybe_warn_threshold(sched, t)
    return _result_from_state(_search_state(inst, sched, t))


@dataclass(frozen=True)
class QaoaAngleSet:
    """Alternating-operator angles equivalent to a schedule-driven search."""

    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        b = np.asarray(self.betas, dtype=float)
        if g.shape != b.shape or g.ndim != 1 or g.size < 1:
            raise ValueError(f"inconsistent angle shapes {g.shape} / {b.shape}")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    def __len__(self) -> int:
        return self.gammas.size


def qaoa_angles(sched: Schedule, t: int) -> QaoaAngleSet:
    """Angles gamma_j = f(j/t), beta_j = 1 - gamma_j for j = 0..t-1."""
    if t < 1:
        raise ValueError(f"need at least one step, got {t}")
    gammas = np.atleast_1d(schedule_values(sched, np.arange(t) / t)[0])
    return QaoaAngleSet(gammas=gammas, betas=1.0 - gammas)


def qaoa_replay(inst: GroverInstance, angles: QaoaAngleSet) -> SearchResult:
    """Run the search from explicit angles; bit-identical to run_search
    when the angles came from the same schedule and step count."""
    return _result_from_state(_replay_state(inst, angles.gammas))


# ---------------------------------------------------------------------------
# step-count scaling

@dataclass(frozen=True)
class ScalingCell:
    """Minimal step count hitting the target error for one (n, m) cell."""

    n: int
    m: int
    schedule: str
    target_error: float
    t_required: int | None
    normalized_ratio: float
    unreached: bool = False


def _cell_schedule(kind: str, n: int, m: int, p: float) -> Schedule:
    if kind == "power":
        n_eff = max(2, round(n / m))
        return build_grover_schedule(n_eff, p)
    if kind == "bc":
        return bc_composite_schedule()
    if kind == "linear":
        return linear_schedule()
    raise ValueError(f"unknown scaling schedule kind {kind!r}")


def _normalized_ratio(kind: str, n: int, m: int, t: float) -> float:
    ratio_base = math.sqrt(n / m)
    if kind == "power":
        return t / (ratio_base * math.log(n))
    if kind == "bc":
        return t / (ratio_base * math.log(n / m) ** 4)
    return t / (n / m)


def scaling_experiment(
    n_list,
    m_list,
    schedule_kind: str,
    target_error: float,
    *,
    p: float = 1.0,
    cap: int = SCALING_CAP,
) -> list:
    """Minimal t with search error <= target, per (n, m) cell.

    Found by doubling from t = 4 and then bisecting on the step count;
    a cell whose doubling passes ``cap`` is flagged unreached.  Regime
    warnings from the probing runs are suppressed.
    """
    if not 0.0 < target_error < 1.0:
        raise ValueError(f"target error must be in (0, 1), got {target_error}")
    cells = []
    for n in n_list:
        for m in m_list:
            inst = GroverInstance(int(n), int(m))
            sched = _cell_schedule(schedule_kind, inst.n, inst.m, p)

            def err(t: int) -> float:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", ThresholdWarning)
                    return run_search(inst, sched, t).error

            t = 4
            while t <= cap and err(t) > target_error:
                t *= 2
            if t > cap:
                cells.append(
                    ScalingCell(
                        n=inst.n,
                        m=inst.m,
                        schedule=schedule_kind,
                        target_error=target_error,
                        t_required=None,
                        normalized_ratio=float("nan"),
                        unreached=True,
                    )
                )
                continue
            lo = t // 2 if t > 4 else 0  # largest step count known to fail (0: untested)
            hi = t
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if err(mid) <= target_error:
                    hi = mid
                else:
                    lo = mid
            cells.append(
                ScalingCell(
                    n=inst.n,
                    m=inst.m,
                    schedule=schedule_kind,
                    target_error=target_error,
                    t_required=hi,
                    normalized_ratio=_normalized_ratio(schedule_kind, inst.n, inst.m, hi),
                )
            )
    return cells
