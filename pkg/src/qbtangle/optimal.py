"""Optimal times and fields that drive the 1-3 tangle to its maximum fastest.

Two initial classes carry nontrivial 1-3 entanglement dynamics: the
bi-separable state entangled across the end qubits (B2, and W which follows
it up to a factor 4/9) and GHZ. For B2 two regimes exist, selected by the
coupling ratio K against energy-dependent thresholds.

The branch-1 field formulas are evaluated as stated and can contradict the
energy budget (negative B_z^2); that case raises :class:`NegativeBzSquared`
instead of being clipped.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import enum
import math

from .errors import DivergentTime, InvalidEnergy, NegativeBzSquared, OutOfRange
from .model import ChainParams, FieldParams, omega_k_sq
from .propagator import StateClass

B2_SPLIT_ENERGY = 29.0 / 16.0
GHZ_MIN_ENERGY = 1.5
_DIVERGENCE_EPS = 1e-12
_RADICAND_EPS = 1e-12


class Branch(enum.Enum):
    BRANCH1 = "Branch1"
    BRANCH2 = "Branch2"
    GHZ = "GHZ"
    OUT_OF_RANGE = "OutOfRange"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Thresholds:
    """Coupling-ratio window edges; ``None`` where the defining root is complex."""

    k1_plus: float
    k1_minus: float
    k2_plus: float | None
    k2_minus: float | None
    k_ghz_plus: float | None
    k_ghz_minus: float | None


@dataclass(frozen=True)
class OptimalPlan:
    branch: Branch
    tau_star: float
    field: FieldParams
    b0: float
    bz: float
    omega_big: float
    diagnostics: tuple[str, ...] = ()
    alternatives: tuple[FieldParams, ...] = dc_field(default=())

    @property
    def valid(self):
        return not self.diagnostics


def _check_energy(omega_hat_sq):
    if not omega_hat_sq > 1.0:
        raise InvalidEnergy(f"omega_hat^2 must exceed 1, got {omega_hat_sq}")


def thresholds(omega_hat_sq: float) -> Thresholds:
    _check_energy(omega_hat_sq)
    k1 = math.sqrt(omega_hat_sq - 1.0)
    k2_plus = k2_minus = None
    if omega_hat_sq >= B2_SPLIT_ENERGY:
        r = math.sqrt(3.0 * (omega_hat_sq - B2_SPLIT_ENERGY))
        k2_plus = 0.25 * (13.0 / 4.0 + r)
        k2_minus = 0.25 * (13.0 / 4.0 - r)
    kg_plus = kg_minus = None
    if omega_hat_sq >= GHZ_MIN_ENERGY:
        r = math.sqrt(2.0 * omega_hat_sq - 3.0)
        kg_plus = 0.5 * (-1.0 + r)
        kg_minus = 0.5 * (-1.0 - r)
    return Thresholds(k1, -k1, k2_plus, k2_minus, kg_plus, kg_minus)


def classify_b2(omega_hat_sq: float, k: float) -> Branch:
    t = thresholds(omega_hat_sq)
    if omega_hat_sq < B2_SPLIT_ENERGY:
        return Branch.BRANCH1 if abs(k) < t.k1_plus else Branch.OUT_OF_RANGE
    if omega_hat_sq > B2_SPLIT_ENERGY:
        if t.k2_minus < k < t.k2_plus:
            return Branch.BRANCH2
        if t.k1_minus < k < t.k2_minus or t.k2_plus < k < t.k1_plus:
            return Branch.BRANCH1
    return Branch.OUT_OF_RANGE


def tau_star_b2(omega_hat_sq: float, k: float) -> float:
    branch = classify_b2(omega_hat_sq, k)
    if branch is Branch.BRANCH2:
        return math.pi / math.sqrt(omega_hat_sq - 2.0 * k)
    if branch is Branch.BRANCH1:
        if abs(1.0 - k) < _DIVERGENCE_EPS:
            raise DivergentTime("branch-1 optimal time diverges as K -> 1")
        return math.sqrt(3.0) / 4.0 * math.pi / abs(1.0 - k)
    raise OutOfRange(f"no B2 optimal-time formula at omega_hat^2={omega_hat_sq}, K={k}")


def branch1_bz_radicand(omega_hat_sq: float, k: float) -> float:
    return omega_hat_sq - 7.0 / 3.0 * k * k + 8.0 / 3.0 * k - 7.0 / 3.0


def optimal_fields_b2(omega_hat_sq: float, k: float, branch: Branch | None = None) -> OptimalPlan:
    """Optimal B2 plan. Branch 1 emits the Omega = 2[K-1+Bz] variant as
    ``field`` and the 2[K-1-Bz] variant in ``alternatives``."""
    if branch is None:
        branch = classify_b2(omega_hat_sq, k)
    if branch is Branch.OUT_OF_RANGE:
        raise OutOfRange(f"no B2 branch at omega_hat^2={omega_hat_sq}, K={k}")
    p = ChainParams(k, omega_hat_sq)
    wk_sq = omega_k_sq(p)
    if branch is Branch.BRANCH2:
        b0 = math.sqrt(wk_sq)
        f = FieldParams(phi=0.0, omega_big=0.0, theta0=0.0)
        return OptimalPlan(branch, tau_star_b2(omega_hat_sq, k), f, b0, 0.0, 0.0)
    if branch is not Branch.BRANCH1:
        raise ValueError(f"not a B2 branch: {branch}")
    b0 = 2.0 / math.sqrt(3.0) * abs(k - 1.0)
    rad = branch1_bz_radicand(omega_hat_sq, k)
    if rad < -_RADICAND_EPS:
        raise NegativeBzSquared(
            f"branch-1 B_z^2 = {rad:.6g} < 0 at omega_hat^2={omega_hat_sq}, K={k}",
            radicand=rad,
            branch=branch,
        )
    bz = math.sqrt(max(rad, 0.0))
    tau_star = math.sqrt(3.0) / 4.0 * math.pi / abs(1.0 - k)
    om_plus = 2.0 * (k - 1.0 + bz)
    om_minus = 2.0 * (k - 1.0 - bz)
    diagnostics = []
    if abs(b0 * b0 + bz * bz - wk_sq) > 1e-12 * max(1.0, wk_sq):
        diagnostics.append("EnergyMismatch")
    return OptimalPlan(
        branch,
        tau_star,
        FieldParams.from_components(b0, bz, om_plus),
        b0,
        bz,
        om_plus,
        tuple(diagnostics),
        (FieldParams.from_components(b0, bz, om_minus),),
    )


def tau_star_ghz(omega_hat_sq: float, k: float) -> float:
    if abs(1.0 + k) < _DIVERGENCE_EPS:
        raise DivergentTime("GHZ optimal time diverges as K -> -1")
    t = thresholds(omega_hat_sq)
    if not (omega_hat_sq > GHZ_MIN_ENERGY and t.k_ghz_minus < k < t.k_ghz_plus):
        raise OutOfRange(
            f"K={k} outside the GHZ window ({t.k_ghz_minus}, {t.k_ghz_plus})"
        )
    return math.sqrt(2.0) / 4.0 * math.pi / abs(1.0 + k)


def optimal_fields_ghz(omega_hat_sq: float, k: float) -> OptimalPlan:
    """GHZ plan: B0 = |1+K|, Bz = Omega/2 = sqrt(omega_hat^2 - 2(K^2+K+1)).

    The window edges (radicand exactly zero) are accepted and flagged with
    an ``OnWindowBoundary`` diagnostic.
    """
    _check_energy(omega_hat_sq)
    rad = omega_hat_sq - 2.0 * (k * k + k + 1.0)
    if rad < -_RADICAND_EPS:
        raise NegativeBzSquared(
            f"GHZ B_z^2 = {rad:.6g} < 0 at omega_hat^2={omega_hat_sq}, K={k}",
            radicand=rad,
            branch=Branch.GHZ,
        )
    if abs(1.0 + k) < _DIVERGENCE_EPS:
        raise DivergentTime("GHZ optimal time diverges as K -> -1")
    b0 = abs(1.0 + k)
    bz = math.sqrt(max(rad, 0.0))
    diagnostics = []
    try:
        tau_star = tau_star_ghz(omega_hat_sq, k)
    except OutOfRange:
        tau_star = math.sqrt(2.0) / 4.0 * math.pi / abs(1.0 + k)
        diagnostics.append("OnWindowBoundary")
    f = FieldParams.from_components(b0, bz, 2.0 * bz)
    return OptimalPlan(Branch.GHZ, tau_star, f, b0, bz, 2.0 * bz, tuple(diagnostics))


def optimal_plan(c: StateClass, omega_hat_sq: float, k: float) -> OptimalPlan:
    """Plan for a class; W shares the B2 plan since its 1-3 tangle is 4/9 of B2's."""
    c = StateClass.parse(c)
    if c in (StateClass.B2, StateClass.W):
        return optimal_fields_b2(omega_hat_sq, k)
    if c is StateClass.GHZ:
        return optimal_fields_ghz(omega_hat_sq, k)
    raise OutOfRange(f"class {c.value} has no optimal plan (its 1-3 tangle stays zero)")
