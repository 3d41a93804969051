"""Independent numerical ground truth for the analytic results.

Nothing here touches the mode decomposition: the Hamiltonian is rebuilt from
Pauli tensor products and the time-ordered exponential is integrated with
the exponential midpoint rule (each step exact for the frozen midpoint
Hamiltonian), then Richardson-extrapolated from steps h and h/2.

The search answers "how soon can the 1-3 tangle reach its largest value",
a lexicographic problem (largest value first, then earliest time). The
maxima form ridges in (tau, phi, Omega), so a plain maximizer wanders along
them. The search therefore runs in three deterministic stages: a coarse
grid over whole trajectories, a bounded Powell refinement (conjugate
coordinate directions) inside every near-top time cell, and an onset fit
that pins the earliest top time from how fast the deficit closes just
before it. A candidate only counts once its trajectory has made a real
excursion (dipped at least ``min_excursion`` below the candidate value);
otherwise states that start at the maximum (B2, W) would be "optimal" at
tau = 0.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import least_squares, minimize

from .errors import EmptyBounds, StepTooLarge
from .model import ChainParams, FieldParams
from .propagator import StateClass, evolve_class, evolve_general, representative_state
from .tangle import hyperdet, tau13_closed, two_tangle_13

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _pauli_string(label):
    out = np.eye(1, dtype=complex)
    for ch in label:
        out = np.kron(out, _PAULI[ch])
    return out


_ZZI = _pauli_string("zzi")
_IZZ = _pauli_string("izz")
_IXI = _pauli_string("ixi")
_IYI = _pauli_string("iyi")
_IZI = _pauli_string("izi")

SEARCHABLE = (StateClass.B2, StateClass.W, StateClass.GHZ)


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 1e-4
    scheme: str = "midpoint-exponential+richardson"

    def validate(self, omega_hat_sq):
        if not self.step > 0:
            raise StepTooLarge(f"step must be positive, got {self.step}")
        bound = 0.01 / math.sqrt(omega_hat_sq)
        if self.step > bound:
            raise StepTooLarge(f"step {self.step} exceeds 0.01/omega_hat = {bound:.3g}")


@dataclass(frozen=True)
class IntegrationResult:
    u: np.ndarray
    u_coarse: np.ndarray
    u_fine: np.ndarray
    error_estimate: float
    steps: int


def _hamiltonians(p: ChainParams, f: FieldParams, times):
    wk = math.sqrt(max(p.omega_hat_sq - 1.0 - p.k_ratio**2, 0.0))
    b0 = wk * math.cos(f.phi)
    bz = wk * math.sin(f.phi)
    theta = f.omega_big * times + f.theta0
    bx = (b0 * np.cos(theta))[:, None, None]
    by = (b0 * np.sin(theta))[:, None, None]
    return _ZZI + p.k_ratio * _IZZ + bx * _IXI + by * _IYI + bz * _IZI


def _ordered_product(mats):
    """mats[n-1] @ ... @ mats[0] by pairwise reduction."""
    while len(mats) > 1:
        if len(mats) % 2:
            mats = np.concatenate([mats, np.eye(8, dtype=complex)[None]], axis=0)
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def _midpoint_product(p, f, t0, t1, n):
    h = (t1 - t0) / n
    mids = t0 + (np.arange(n) + 0.5) * h
    w, v = np.linalg.eigh(_hamiltonians(p, f, mids))
    steps = (v * np.exp(-1j * h * w)[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return _ordered_product(steps)


def _segment(p, f, t0, t1, step):
    if t1 <= t0:
        eye = np.eye(8, dtype=complex)
        return eye, eye, eye
    n = max(1, math.ceil((t1 - t0) / step - 1e-9))
    coarse = _midpoint_product(p, f, t0, t1, n)
    fine = _midpoint_product(p, f, t0, t1, 2 * n)
    return (4.0 * fine - coarse) / 3.0, coarse, fine


def integrate_u(p: ChainParams, f: FieldParams, tau: float, cfg: IntegratorConfig | None = None) -> IntegrationResult:
    """Time-ordered propagator U(tau) with an error estimate from step halving."""
    cfg = cfg or IntegratorConfig()
    cfg.validate(p.omega_hat_sq)
    u, coarse, fine = _segment(p, f, 0.0, float(tau), cfg.step)
    n = max(0, math.ceil(float(tau) / cfg.step - 1e-9))
    return IntegrationResult(u, coarse, fine, float(np.abs(u - fine).max()), n)


def integrate_path(p: ChainParams, f: FieldParams, taus, cfg: IntegratorConfig | None = None) -> np.ndarray:
    """Propagators at every time in the ascending array ``taus``, shape (n, 8, 8)."""
    cfg = cfg or IntegratorConfig()
    cfg.validate(p.omega_hat_sq)
    taus = np.asarray(taus, dtype=float)
    if np.any(np.diff(taus) < 0) or (taus.size and taus[0] < 0):
        raise ValueError("times must be non-negative and ascending")
    out = np.empty((taus.size, 8, 8), dtype=complex)
    u = np.eye(8, dtype=complex)
    prev = 0.0
    for j, t in enumerate(taus):
        seg, _, _ = _segment(p, f, prev, t, cfg.step)
        u = seg @ u
        out[j] = u
        prev = t
    return out


# --- search -----------------------------------------------------------------


@dataclass(frozen=True)
class SearchBounds:
    tau_max: float
    omega_max: float

    def validate(self):
        if not (self.tau_max > 0 and self.omega_max >= 0):
            raise EmptyBounds(f"empty search box: {self}")


def default_bounds(omega_hat_sq: float) -> SearchBounds:
    w = math.sqrt(omega_hat_sq)
    return SearchBounds(tau_max=2.0 * math.pi / w, omega_max=2.0 * w)


@dataclass(frozen=True)
class SearchResult:
    tau_best: float
    phi_best: float
    omega_big_best: float
    value_best: float
    evaluations: int
    excursion_found: bool = True
    onset_order: float = math.nan


class _Objective:
    """tau13 as a function of (tau, phi, Omega) plus the excursion rule."""

    def __init__(self, c, p, path, min_excursion, history):
        self.c = c
        self.p = p
        self.path = path
        self.min_excursion = min_excursion
        self.history = history
        self.evaluations = 0
        if path == "chain":
            self._psi0 = representative_state(c)
        elif path != "closed":
            raise ValueError(f"path must be 'closed' or 'chain', got {path!r}")

    def trajectories(self, phi, om, ts):
        """tau13 on the time samples ``ts`` for broadcastable field arrays."""
        phi, om = np.broadcast_arrays(np.asarray(phi, float), np.asarray(om, float))
        ts = np.asarray(ts, dtype=float)
        if self.path == "closed":
            f = FieldParams(phi[..., None], om[..., None], 0.0)
            out = np.asarray(tau13_closed(self.c, self.p, f, ts))
        else:
            out = np.empty(phi.shape + ts.shape)
            for idx in np.ndindex(phi.shape):
                f = FieldParams(float(phi[idx]), float(om[idx]), 0.0)
                out[idx] = two_tangle_13(evolve_general(self._psi0, self.p, f, ts))
        self.evaluations += out.size
        return out

    def point(self, tau, phi, om):
        if self.path == "chain":
            return float(self.trajectories(phi, om, np.array([tau]))[..., 0])
        self.evaluations += 1
        return tau13_closed(self.c, self.p, FieldParams(float(phi), float(om), 0.0), float(tau))

    def deficit(self, tau, phi, om):
        """3-tangle of the evolved state, free of the cancellation in total - tau13."""
        f = FieldParams(float(phi), float(om), 0.0)
        if self.path == "closed":
            psi = evolve_class(self.c, self.p, f, float(tau))
        else:
            psi = evolve_general(self._psi0, self.p, f, float(tau))
        self.evaluations += 1
        return 4.0 * abs(complex(hyperdet(psi)))

    def feasible(self, tau, phi, om):
        traj = self.trajectories(phi, om, np.linspace(0.0, tau, self.history + 1))
        return traj.min() <= traj[-1] - self.min_excursion


def _ascend(obj, tau, start, widths, omega_max, tol):
    """Bounded Powell ascent over (phi, Omega) at fixed tau, in a box around ``start``."""
    box = [
        (start[0] - 2.0 * widths[0], start[0] + 2.0 * widths[0]),
        (max(start[1] - 2.0 * widths[1], -omega_max), min(start[1] + 2.0 * widths[1], omega_max)),
    ]
    res = minimize(
        lambda x: -obj.point(tau, x[0], x[1]),
        np.asarray(start, dtype=float),
        method="Powell",
        bounds=box,
        options={"xtol": tol, "ftol": 1e-16, "maxfev": 4000},
    )
    return -float(res.fun), float(res.x[0]) % (2.0 * math.pi), float(res.x[1])


class _Level:
    """M(tau): best tau13 over the field constants at fixed tau, from given seeds."""

    def __init__(self, obj, widths, omega_max, tol):
        self.obj = obj
        self.widths = widths
        self.omega_max = omega_max
        self.tol = tol

    def __call__(self, tau, seeds):
        best = (-1.0, math.nan, math.nan)
        for seed in seeds:
            v, phi, om = _ascend(self.obj, tau, seed, self.widths, self.omega_max, self.tol)
            if v > best[0] and self.obj.feasible(tau, phi, om):
                best = (v, phi, om)
        return best


def _top_columns(values, feasible, count):
    """Indices of the ``count`` best feasible grid columns, best first, ties by index."""
    masked = np.where(feasible, values, -1.0).ravel()
    order = np.argsort(-masked, kind="stable")[:count]
    return [np.unravel_index(k, values.shape) for k in order if masked[k] >= 0]


def maximize_tau13(
    c,
    omega_hat_sq: float,
    k: float,
    bounds: SearchBounds | None = None,
    grid=(64, 32, 64),
    *,
    min_excursion: float = 0.05,
    tol: float = 1e-8,
    value_tol: float = 1e-10,
    flat_tol: float = 1e-14,
    candidate_window: float = 0.1,
    seeds: int = 3,
    fold_probe: float = 0.02,
    fit_start: float = 2.5e-3,
    path: str = "closed",
    history: int = 4,
) -> SearchResult:
    """Earliest time at which the 1-3 tangle reaches its largest attainable value.

    ``grid`` is (tau points, phi points, Omega points) and ``history`` the
    number of trajectory samples per tau cell used by the excursion rule.
    Cells whose coarse value is within ``candidate_window`` of the best are
    refined; the earliest one within ``value_tol`` of the overall top wins.
    Its onset is then fitted from the 3-tangle deficit sampled at geometric
    distances starting ``fit_start`` cells before the peak, ignoring
    samples below ``flat_tol``. ``onset_order`` in the result is the fitted
    power (2 for a fold, 4 for a quartic touch). Fully deterministic.
    """
    c = StateClass.parse(c)
    if c not in SEARCHABLE:
        raise ValueError(f"search is defined for b2, w and ghz, not {c.value}")
    bounds = bounds or default_bounds(omega_hat_sq)
    bounds.validate()
    n_tau, n_phi, n_om = grid
    p = ChainParams(k, omega_hat_sq)
    obj = _Objective(c, p, path, min_excursion, history)
    phis = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    oms = np.linspace(-bounds.omega_max, bounds.omega_max, n_om)
    d_tau = bounds.tau_max / n_tau
    taus = d_tau * np.arange(1, n_tau + 1)
    widths = (2.0 * math.pi / n_phi, (oms[1] - oms[0]) if n_om > 1 else 0.0)

    # Coarse pass: whole trajectories for every field column at once.
    samples = np.linspace(0.0, bounds.tau_max, n_tau * history + 1)
    traj = obj.trajectories(phis[:, None], oms[None, :], samples)
    running_min = np.minimum.accumulate(traj, axis=-1)
    at = traj[..., history::history]
    ok = running_min[..., history::history] <= at - min_excursion
    m_grid = np.where(ok, at, -1.0).reshape(-1, n_tau).max(axis=0)
    if m_grid.max() < 0:
        return SearchResult(math.nan, math.nan, math.nan, 0.0, obj.evaluations, False)

    level = _Level(obj, widths, bounds.omega_max, tol)

    def refine(j, upper=None, extra=()):
        """Local maximum of tau13 over (tau, phi, Omega) inside coarse cell j.

        ``upper`` caps the time bracket; ``extra`` adds field seeds.
        """
        lo = taus[j - 1] if j > 0 else 0.5 * taus[0]
        hi = min(taus[j] + d_tau, bounds.tau_max)
        open_top = hi >= bounds.tau_max and upper is None
        if upper is not None:
            hi = min(hi, upper)
        best = (math.nan, -1.0, math.nan, math.nan)
        if hi <= lo:
            return best
        starts = [(phis[a], oms[b]) for a, b in _top_columns(at[..., j], ok[..., j], seeds)]
        for phi0, om0 in starts + list(extra):
            box = [
                (lo, hi),
                (phi0 - 2.0 * widths[0], phi0 + 2.0 * widths[0]),
                (max(om0 - 2.0 * widths[1], -bounds.omega_max),
                 min(om0 + 2.0 * widths[1], bounds.omega_max)),
            ]
            res = minimize(
                lambda x: -obj.point(x[0], x[1], x[2]),
                np.array([min(taus[j], 0.5 * (lo + hi)), phi0, om0]),
                method="Powell",
                bounds=box,
                options={"xtol": 1e-6, "ftol": 1e-14, "maxfev": 3000},
            )
            t, phi, om = (float(v) for v in res.x)
            on_edge = (t - lo < 1e-9 and j > 0) or (hi - t < 1e-9 and not open_top)
            if on_edge:
                continue
            if -res.fun > best[1] and obj.feasible(t, phi, om):
                best = (t, -float(res.fun), phi % (2.0 * math.pi), om)
        return best

    # Every near-top cell is refined; the answer is the earliest one that
    # reaches the overall top. A refinement ending on its tau bracket belongs
    # to the neighbouring cell and is dropped.
    refined = []
    for j in range(n_tau):
        if m_grid[j] < m_grid.max() - candidate_window:
            continue
        cand = refine(j)
        if cand[1] >= 0:
            refined.append((j,) + cand)
    if not refined:
        return SearchResult(math.nan, math.nan, math.nan, 0.0, obj.evaluations, False)
    top = max(r[2] for r in refined)
    j_p, tau_p, v_p, phi_p, om_p = next(r for r in refined if r[2] >= top - value_tol)
    # A cell can hold several separate top points; keep the earliest.
    while True:
        cand = refine(j_p, upper=tau_p - fold_probe * d_tau, extra=[(phi_p, om_p)])
        if cand[1] < top - value_tol:
            break
        tau_p, v_p, phi_p, om_p = cand
    top = max(top, v_p)

    # Earliest time on the top set. Along the trajectory tau13 + tau123 is
    # conserved, so the deficit below the top is the 3-tangle, which unlike
    # top - tau13 keeps relative precision. F(tau), its minimum over the
    # fields, is well conditioned before the answer and grows there like
    # C (tau* - tau)^n (n = 2 at a fold, 4 at a quartic touch); tau* is the
    # fitted zero of that law from samples at geometric distances.
    def min_deficit(t, starts):
        best = (math.inf, math.nan, math.nan)
        for seed in starts:
            box = [
                (seed[0] - 2.0 * widths[0], seed[0] + 2.0 * widths[0]),
                (max(seed[1] - 2.0 * widths[1], -bounds.omega_max),
                 min(seed[1] + 2.0 * widths[1], bounds.omega_max)),
            ]
            res = minimize(
                lambda x: obj.deficit(t, x[0], x[1]),
                np.asarray(seed, dtype=float),
                method="Powell",
                bounds=box,
                options={"xtol": 1e-10, "ftol": 1e-15, "maxfev": 4000},
            )
            if res.fun < best[0]:
                best = (float(res.fun), float(res.x[0]), float(res.x[1]))
        return best

    peak_seed = (phi_p, om_p)
    grid_seeds = [
        (phis[a], oms[b])
        for jj in (j_p - 2, j_p - 1)
        if jj >= 0
        for a, b in _top_columns(at[..., jj], ok[..., jj], 1)
    ]
    samples = []
    current = peak_seed
    dist = fit_start * d_tau
    while dist < 2.0 * d_tau and tau_p - dist > 0:
        d, phi, om = min_deficit(tau_p - dist, [current, peak_seed] + grid_seeds)
        samples.append((tau_p - dist, d, phi, om))
        current = (phi, om)
        dist *= 2.0
    fit = _fit_onset(samples, flat_tol, upper=tau_p + fit_start * d_tau)
    if fit is None:
        flat = [s for s in samples if s[1] <= flat_tol]
        tau_best = min(s[0] for s in flat) if flat else tau_p
        order = math.nan
    else:
        tau_best, order = fit
    near = min(samples, key=lambda s: abs(s[0] - tau_best)) if samples else None
    starts = [peak_seed] + ([(near[2], near[3])] if near else [])
    v, phi, om = level(tau_best, starts)
    if not v >= 0:
        phi, om = peak_seed
        v = obj.point(tau_best, phi, om)
    return SearchResult(
        float(tau_best), float(phi), float(om), float(v), obj.evaluations, True, float(order)
    )


def _fit_onset(samples, flat_tol, upper, ceiling=1e-3):
    """Fit log F = log C + n log(x - t) + c2 (x - t)^2 to the non-flat samples.

    Returns (x, n) or None when fewer than five samples are usable or the
    fit is not a clean power law.
    """
    use = [(t, d) for t, d, _, _ in samples if flat_tol < d < ceiling]
    if len(use) < 5:
        return None
    t = np.array([u[0] for u in use])
    logf = np.log([u[1] for u in use])

    def residual(q):
        x, log_c, n, c2 = q
        return log_c + n * np.log(x - t) + c2 * (x - t) ** 2 - logf

    lo = t.max() + 1e-12
    if upper <= lo:
        return None
    sol = least_squares(
        residual,
        [0.5 * (lo + upper), 0.0, 2.0, 0.0],
        bounds=([lo, -60.0, 0.5, -1e5], [upper, 60.0, 10.0, 1e5]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    if not sol.success or np.max(np.abs(sol.fun)) > 1e-3:
        return None
    return float(sol.x[0]), float(sol.x[2])


def scan_max_tau13(c, p: ChainParams, tau_max: float, n_tau=1000, fields=()) -> float:
    """Largest 1-3 tangle over a tau grid for each given field, via the definition chain."""
    psi0 = representative_state(c)
    taus = np.linspace(0.0, tau_max, n_tau)
    best = 0.0
    for f in fields:
        best = max(best, float(np.max(two_tangle_13(evolve_general(psi0, p, f, taus)))))
    return best


# --- local curvature ---------------------------------------------------------


@dataclass(frozen=True)
class HessianResult:
    matrix: np.ndarray
    gradient: np.ndarray
    determinant: float


def hessian_at(c, p: ChainParams, f: FieldParams, tau: float, h: float = 1e-4) -> HessianResult:
    """Central-difference Hessian and gradient of tau13 in (tau, phi, Omega)."""
    c = StateClass.parse(c)
    x0 = np.array([tau, f.phi, f.omega_big], dtype=float)

    def value(x):
        return float(tau13_closed(c, p, FieldParams(x[1], x[2], f.theta0), x[0]))

    eye = np.eye(3)
    grad = np.array([(value(x0 + h * e) - value(x0 - h * e)) / (2 * h) for e in eye])
    hess = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            ei, ej = h * eye[i], h * eye[j]
            hess[i, j] = hess[j, i] = (
                value(x0 + ei + ej) - value(x0 + ei - ej) - value(x0 - ei + ej) + value(x0 - ei - ej)
            ) / (4 * h * h)
    return HessianResult(hess, grad, float(np.linalg.det(hess)))
