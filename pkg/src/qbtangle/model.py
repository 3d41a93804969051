"""Dimensionless chain parameters, control-field constants and mode functions.

Everything is expressed in units of the 1-2 coupling: K = J23/J12,
omega_hat = omega/J12, tau = J12*t and B = J12*B_hat.

The outer qubits (1, 3) are never flipped by the Hamiltonian, so the
dynamics splits into four 2x2 blocks ("modes") acting on the middle qubit,
one per outer bit pair (q1, q3) = (0,0), (0,1), (1,0), (1,1).
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import InsufficientEnergy

# Ising offsets z1 + K*z3 per mode, as (constant, coefficient of K).
_MODE_OFFSETS = ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0))
MODES = (1, 2, 3, 4)
_SERIES_CUTOFF = 1e-6

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class ChainParams:
    """Coupling ratio K and squared rescaled energy omega_hat^2."""

    k_ratio: float
    omega_hat_sq: float


@dataclass(frozen=True)
class FieldParams:
    """Integration constants of the precessing control field.

    The field magnitude is fixed by the energy budget, so only its tilt
    ``phi`` is stored: B0 = omega_k cos(phi), Bz = omega_k sin(phi).
    """

    phi: float = 0.0
    omega_big: float = 0.0
    theta0: float = 0.0

    @classmethod
    def from_components(cls, b0, bz, omega_big=0.0, theta0=0.0):
        """Chart (B0, Bz) into the tilt angle; the magnitude is dropped."""
        phi = math.atan2(bz, b0) if (b0 or bz) else 0.0
        return cls(phi=phi, omega_big=omega_big, theta0=theta0)


@dataclass(frozen=True)
class ModeConstants:
    """Per-mode detuning beta_i and frequency omega_i (index 0 is mode 1)."""

    beta: tuple[float, float, float, float]
    omega: tuple[float, float, float, float]
    b0: float
    bz: float
    omega_big: float
    theta0: float


def omega_k_sq(p: ChainParams) -> float:
    """Squared field magnitude allowed by the energy budget."""
    value = p.omega_hat_sq - 1.0 - p.k_ratio**2
    if value < 0:
        raise InsufficientEnergy(
            f"omega_hat^2={p.omega_hat_sq} < 1 + K^2 = {1 + p.k_ratio**2}"
        )
    return value


def field_magnitudes(p: ChainParams, f: FieldParams) -> tuple[float, float]:
    """Return (B0, Bz) derived from the tilt chart."""
    wk = math.sqrt(omega_k_sq(p))
    if np.ndim(f.phi) == 0:
        return wk * math.cos(f.phi), wk * math.sin(f.phi)
    return wk * np.cos(f.phi), wk * np.sin(f.phi)


def mode_constants(p: ChainParams, f: FieldParams) -> ModeConstants:
    """Mode detunings and frequencies.

    Field constants may be numpy arrays; every entry then broadcasts, which
    is how the search evaluates whole (phi, Omega) grids at once.
    """
    b0, bz = field_magnitudes(p, f)
    k = p.k_ratio
    beta = tuple(bz + c + s * k - 0.5 * f.omega_big for c, s in _MODE_OFFSETS)
    hyp = math.hypot if np.ndim(b0) == 0 and np.ndim(f.omega_big) == 0 else np.hypot
    omega = tuple(hyp(b0, b) for b in beta)
    return ModeConstants(beta, omega, b0, bz, f.omega_big, f.theta0)


def _sinc_time(w, tau):
    """sin(w*tau)/w with the w*tau -> 0 limit taken by series."""
    tau = np.asarray(tau, dtype=float)
    x = w * tau
    small = np.abs(x) < _SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sin(x) / w
    series = tau * (1.0 - x**2 / 6.0 + x**4 / 120.0)
    return np.where(small, series, direct)


def mode_functions(m: ModeConstants, i: int, tau):
    """Return (s_i, c_i, a_i) at rescaled time(s) ``tau`` for mode ``i`` in 1..4.

    a_i = c_i + i*beta_i*s_i; each block satisfies |a_i|^2 + B0^2 s_i^2 = 1.
    Scalars in, scalars out; arrays broadcast.
    """
    w = m.omega[i - 1]
    beta = m.beta[i - 1]
    if isinstance(tau, float) and isinstance(w, float):
        x = w * tau
        if abs(x) < _SERIES_CUTOFF:
            s = tau * (1.0 - x * x / 6.0 + x**4 / 120.0)
        else:
            s = math.sin(x) / w
        c = math.cos(x)
        return s, c, complex(c, beta * s)
    s = _sinc_time(w, tau)
    c = np.cos(w * np.asarray(tau, dtype=float))
    a = c + 1j * beta * s
    if np.ndim(a) == 0:
        return float(s), float(c), complex(a)
    return s, c, a


def field_vector(p: ChainParams, f: FieldParams, tau) -> np.ndarray:
    """Control field (Bx, By, Bz) at time(s) tau; shape (3,) or (n, 3)."""
    b0, bz = field_magnitudes(p, f)
    theta = f.omega_big * np.asarray(tau, dtype=float) + f.theta0
    return np.stack(
        [b0 * np.cos(theta), b0 * np.sin(theta), np.full_like(theta, bz)], axis=-1
    )


def embed(op_a, op_b, op_c) -> np.ndarray:
    """Tensor product op_a (qubit 1) x op_b (qubit 2) x op_c (qubit 3)."""
    return np.kron(np.kron(op_a, op_b), op_c)


ZZ_12 = embed(SIGMA_Z, SIGMA_Z, SIGMA_0)
ZZ_23 = embed(SIGMA_0, SIGMA_Z, SIGMA_Z)
MID_PAULIS = tuple(embed(SIGMA_0, s, SIGMA_0) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))


def chain_hamiltonian(k_ratio: float, bvec) -> np.ndarray:
    """Rescaled Hamiltonian H/J12 for a field vector acting on the middle qubit."""
    bx, by, bz = bvec
    return (
        ZZ_12
        + k_ratio * ZZ_23
        + bx * MID_PAULIS[0]
        + by * MID_PAULIS[1]
        + bz * MID_PAULIS[2]
    )


def energy_check(p: ChainParams, f: FieldParams, tau: float = 0.0) -> float:
    """Tr(H^2)/8 - omega_hat^2 for the explicitly assembled H(tau); zero by construction."""
    h = chain_hamiltonian(p.k_ratio, field_vector(p, f, tau))
    return float(np.real(np.trace(h @ h))) / 8.0 - p.omega_hat_sq
