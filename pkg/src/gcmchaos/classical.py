"""Classical dynamics: flow, Poincare sections, chaos fractions, time averages.

The classical limit is shared by both quantization schemes, so everything here
works on Cartesian phase-space points (x, y, px, py).  Trajectories, section
samples, and map cells are independent jobs whose random draws come from
per-sample substreams seeded by (seed, sample index); results are therefore
reproducible and independent of any parallel execution order.

Chaos classification uses the smaller alignment index of two deviation
vectors: regular orbits keep it above 1e-4, chaotic orbits drive it below
1e-8 exponentially, and borderline cases are re-run at twice the horizon
(still-undecided orbits count as regular, which matches the sticky-torus
reading of slow alignment decay).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _scipy_integrate

from . import _integrators as _kern
from .model import ModelParams, accessible_domain, potential_cartesian

SALI_REGULAR = 1e-4
SALI_CHAOTIC = 1e-8
SALI_EXIT = 1e-13
DEFAULT_SALI_TIME = 1e4


class IntegrationError(RuntimeError):
    """Step-size underflow or non-finite state inside the compiled kernels."""


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float
    px: float
    py: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.x, self.y, self.px, self.py))):
            raise ValueError(f"non-finite phase point {self}")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.px, self.py])

    @staticmethod
    def from_array(a) -> "PhasePoint":
        return PhasePoint(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class TrajectoryRecord:
    initial: PhasePoint
    final: PhasePoint
    energy: float
    energy_drift: float           # |H(final) - H(initial)| / max(1, |H(initial)|)
    crossings: np.ndarray         # (n, 2) rows of (x, px) on the y=0, py>0 section
    l2_average: float
    l2_converged: bool | None     # None when no settling test was requested
    sali_final: float | None
    duration: float


@dataclass(frozen=True)
class FregResult:
    f_reg: float
    stderr: float
    n_samples: int
    n_regular: int
    n_chaotic: int
    sali_values: np.ndarray


@dataclass(frozen=True)
class L2Average:
    value: float
    converged: bool
    t_used: float


@dataclass(frozen=True)
class SectionMap:
    E: float
    x: np.ndarray                 # cell-center coordinates
    px: np.ndarray
    values: np.ndarray            # (len(px), len(x)), nan on masked cells
    mask: np.ndarray              # True where the cell is inaccessible
    converged: np.ndarray         # False on masked or unsettled cells


@dataclass(frozen=True)
class BoundsRow:
    B: float
    l2_min: float
    l2_max: float
    n_converged: int
    n_unconverged: int


def _pars(params: ModelParams):
    return params.A, params.B, params.C, params.K


def hamiltonian_classical(params: ModelParams, p: PhasePoint) -> float:
    """(px^2 + py^2)/(2K) + V(x, y)."""
    return float(
        0.5 * (p.px**2 + p.py**2) / params.K
        + potential_cartesian(params, p.x, p.y)
    )


def _check_status(status: int, context: str):
    if status == _kern.STATUS_STEP_UNDERFLOW:
        raise IntegrationError(f"step-size underflow during {context}")
    if status == _kern.STATUS_NONFINITE:
        raise IntegrationError(f"non-finite state during {context}")


def _check_drift(drift: float, context: str):
    if drift >= 1e-8:
        raise IntegrationError(
            f"energy drift {drift:.2e} violates the 1e-8 trajectory audit "
            f"during {context}; tighten the integration tolerance"
        )


def integrate(params: ModelParams, p0: PhasePoint, T: float,
              tol: float = 1e-12) -> TrajectoryRecord:
    """Propagate for duration T (signed); audits the energy drift."""
    if T == 0.0:
        raise ValueError("duration must be nonzero")
    y = np.append(p0.array, 0.0)
    _, status, _ = _kern._propagate(0, y, 0.0, float(T), tol, tol * 1e-2, 1.0,
                                    *_pars(params))
    _check_status(status, f"integrate(T={T})")
    final = PhasePoint.from_array(y[:4])
    e0 = hamiltonian_classical(params, p0)
    drift = abs(hamiltonian_classical(params, final) - e0) / max(1.0, abs(e0))
    _check_drift(drift, f"integrate(T={T})")
    return TrajectoryRecord(
        initial=p0, final=final, energy=e0, energy_drift=drift,
        crossings=np.empty((0, 2)), l2_average=float(y[4] / abs(T)),
        l2_converged=None, sali_final=None, duration=float(T),
    )


def trajectory_states(params: ModelParams, p0: PhasePoint, times,
                      tol: float = 1e-12) -> np.ndarray:
    """States (x, y, px, py) at the requested times; times[0] is t=0."""
    times = np.asarray(times, dtype=float)
    y = np.append(p0.array, 0.0)
    out = np.empty((times.size, 5))
    status = _kern._propagate_dense(0, y, times, out, tol, tol * 1e-2, 1.0,
                                    *_pars(params))
    _check_status(status, "trajectory_states")
    return out[:, :4]


def section_x_intervals(params: ModelParams, E: float):
    """Accessible x intervals on the y = 0 line: {x : V(x, 0) <= E}."""
    intervals = []
    for lo, hi in accessible_domain(params, E, math.pi):  # x < 0 half-line
        intervals.append((-hi, -lo))
    for lo, hi in accessible_domain(params, E, 0.0):      # x > 0 half-line
        intervals.append((lo, hi))
    intervals.sort()
    merged = []
    for lo, hi in intervals:
        if merged and lo - merged[-1][1] < 1e-12:
            merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


def section_area(params: ModelParams, E: float) -> float:
    """Area of the accessible (x, px) section at y = 0 (both px signs)."""
    area = 0.0
    for lo, hi in section_x_intervals(params, E):
        val, _ = _scipy_integrate.quad(
            lambda x: 2.0 * math.sqrt(
                max(2.0 * params.K * (E - potential_cartesian(params, x, 0.0)), 0.0)
            ),
            lo, hi, limit=200,
        )
        area += val
    return area


def _section_bounds(params: ModelParams, E: float):
    intervals = section_x_intervals(params, E)
    if not intervals:
        raise ValueError(f"energy {E} leaves no accessible section at y = 0")
    x_lo = min(lo for lo, _ in intervals)
    x_hi = max(hi for _, hi in intervals)
    xs = np.linspace(x_lo, x_hi, 2001)
    vmin = float(np.min(potential_cartesian(params, xs, np.zeros_like(xs))))
    px_max = math.sqrt(2.0 * params.K * (E - vmin))
    return x_lo, x_hi, px_max


def sample_section_points(params: ModelParams, E: float, n: int,
                          seed: int) -> np.ndarray:
    """n initial conditions uniform over the accessible section, py > 0.

    Each sample uses its own (seed, index) substream, so the set is
    independent of evaluation order.
    """
    x_lo, x_hi, px_max = _section_bounds(params, E)
    out = np.empty((n, 4))
    for k in range(n):
        rng = np.random.default_rng((seed, k))
        while True:
            x = rng.uniform(x_lo, x_hi)
            px = rng.uniform(-px_max, px_max)
            py2 = 2.0 * params.K * (E - potential_cartesian(params, x, 0.0)) - px**2
            if py2 > 0.0:
                out[k] = (x, 0.0, px, math.sqrt(py2))
                break
    return out


def poincare_section(params: ModelParams, E: float, n_traj: int,
                     n_crossings: int, seed: int,
                     tol: float = 1e-12) -> list[TrajectoryRecord]:
    """Upward y = 0 crossings for section-sampled trajectories at energy E."""
    ics = sample_section_points(params, E, n_traj, seed)
    records = []
    t_cap = 1e4 * max(1, n_crossings)  # generous; returns are O(1) apart
    for k in range(n_traj):
        buf = np.empty((n_crossings, 2))
        found, t_end, status, y = _kern._poincare_run(
            np.append(ics[k], 0.0), n_crossings, t_cap, tol, tol * 1e-2,
            *_pars(params), buf,
        )
        _check_status(status, f"poincare trajectory {k}")
        p0 = PhasePoint.from_array(ics[k])
        final = PhasePoint.from_array(y[:4])
        e0 = hamiltonian_classical(params, p0)
        drift = abs(hamiltonian_classical(params, final) - e0) / max(1.0, abs(e0))
        _check_drift(drift, f"poincare trajectory {k}")
        records.append(TrajectoryRecord(
            initial=p0, final=final, energy=e0, energy_drift=drift,
            crossings=buf[:found].copy(), l2_average=float(y[4] / max(t_end, 1e-300)),
            l2_converged=None, sali_final=None, duration=float(t_end),
        ))
    return records


def sali(params: ModelParams, p0: PhasePoint, T: float = DEFAULT_SALI_TIME,
         w1=None, w2=None, tol: float = 1e-9) -> float:
    """Smaller alignment index after time T (early exit once it collapses)."""
    if T <= 0:
        raise ValueError("T must be positive")
    w1 = np.array([1.0, 0.0, 0.0, 0.0]) if w1 is None else np.asarray(w1, float)
    w2 = np.array([0.0, 1.0, 0.0, 0.0]) if w2 is None else np.asarray(w2, float)
    n1, n2 = np.linalg.norm(w1), np.linalg.norm(w2)
    if n1 == 0.0 or n2 == 0.0 or abs(w1 @ w2) / (n1 * n2) > 1.0 - 1e-12:
        raise ValueError("deviation vectors must be nonzero and non-parallel")
    val, _, status = _kern._sali_run(p0.array, w1 / n1, w2 / n2, float(T),
                                     tol, tol * 1e-3, *_pars(params), SALI_EXIT)
    _check_status(status, "sali")
    return float(val)


def _classify(sali_values: np.ndarray) -> np.ndarray:
    """True for regular; borderline values are resolved by the caller."""
    return sali_values > SALI_CHAOTIC


def freg(params: ModelParams, E: float, n_samples: int,
         T: float = DEFAULT_SALI_TIME, seed: int = 0,
         tol: float = 1e-9) -> FregResult:
    """Monte Carlo regular fraction over the section at energy E."""
    ics = sample_section_points(params, E, n_samples, seed)
    vals, status = _kern._sali_batch(ics, float(T), tol, tol * 1e-3,
                                     *_pars(params), SALI_EXIT)
    bad = status != _kern.STATUS_OK
    if bad.any():
        # variational blow-up: flag as chaotic
        vals = vals.copy()
        vals[bad] = 0.0
    undecided = (vals <= SALI_REGULAR) & (vals >= SALI_CHAOTIC)
    if undecided.any():
        revals, restatus = _kern._sali_batch(ics[undecided], 2.0 * float(T),
                                             tol, tol * 1e-3, *_pars(params),
                                             SALI_EXIT)
        revals[restatus != _kern.STATUS_OK] = 0.0
        vals = vals.copy()
        vals[undecided] = revals
    regular = _classify(vals)
    n_reg = int(regular.sum())
    f = n_reg / n_samples
    stderr = math.sqrt(f * (1.0 - f) / n_samples)
    return FregResult(f, stderr, n_samples, n_reg, n_samples - n_reg, vals)


def classical_peres_average(params: ModelParams, p0: PhasePoint, T_max: float,
                            tol: float = 1e-3,
                            integ_tol: float = 1e-10) -> L2Average:
    """Running time average of L^2 = (x py - y px)^2 until it settles."""
    if T_max <= 0:
        raise ValueError("T_max must be positive")
    avg, conv, t_used, status = _kern._l2_average_run(
        p0.array, float(T_max), tol, integ_tol, integ_tol * 1e-2, *_pars(params)
    )
    _check_status(status, "classical_peres_average")
    return L2Average(float(avg), bool(conv), float(t_used))


def l2_section_map(params: ModelParams, E: float, n_x: int = 100,
                   n_px: int = 100, T_max: float = 2000.0,
                   tol: float = 1e-3, integ_tol: float = 1e-10) -> SectionMap:
    """Classical <L^2> from every accessible cell center of the (x, px) mesh."""
    x_lo, x_hi, px_max = _section_bounds(params, E)
    xs = x_lo + (np.arange(n_x) + 0.5) * (x_hi - x_lo) / n_x
    pxs = -px_max + (np.arange(n_px) + 0.5) * (2.0 * px_max) / n_px
    xg, pg = np.meshgrid(xs, pxs)
    py2 = 2.0 * params.K * (E - potential_cartesian(params, xg, np.zeros_like(xg))) - pg**2
    mask = py2 <= 0.0
    sel = ~mask
    ics = np.column_stack([
        xg[sel], np.zeros(int(sel.sum())), pg[sel], np.sqrt(py2[sel]),
    ])
    avgs, conv, _, status = _kern._l2_average_batch(
        ics, float(T_max), tol, integ_tol, integ_tol * 1e-2, *_pars(params)
    )
    values = np.full(xg.shape, np.nan)
    converged = np.zeros(xg.shape, dtype=bool)
    values[sel] = avgs
    converged[sel] = conv & (status == _kern.STATUS_OK)
    return SectionMap(E, xs, pxs, values, mask, converged)


def l2_bounds(params_list, E: float, n_samples: int, T_max: float,
              seed: int = 0, tol: float = 1e-3,
              integ_tol: float = 1e-10) -> list[BoundsRow]:
    """Min/max of converged <L^2>_c over section samples, one row per B."""
    rows = []
    for params in params_list:
        ics = sample_section_points(params, E, n_samples, seed)
        avgs, conv, _, status = _kern._l2_average_batch(
            ics, float(T_max), tol, integ_tol, integ_tol * 1e-2, *_pars(params)
        )
        ok = conv & (status == _kern.STATUS_OK)
        if not ok.any():
            raise IntegrationError(
                f"no converged averages at B={params.B}; raise T_max"
            )
        rows.append(BoundsRow(
            B=params.B,
            l2_min=float(avgs[ok].min()),
            l2_max=float(avgs[ok].max()),
            n_converged=int(ok.sum()),
            n_unconverged=int((~ok).sum()),
        ))
    return rows
