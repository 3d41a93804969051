"""Three-qubit pure-state entanglement: hyperdeterminant, marginal determinants, tangles.

All amplitude functions act on the last axis, so a (n, 8) batch of states
gives n values. The 3-tangle uses the Coffman-Kundu-Wootters normalization
tau_123 = 4 |HypDet|, under which the 1-3 tangle identity

    tau_13 = 2 [det rho_1 - det rho_2 + det rho_3 - |HypDet|]

is exact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeTangle
from .model import ChainParams, FieldParams, mode_constants, mode_functions
from .propagator import StateClass

NEGATIVE_BUG_THRESHOLD = -1e-9
CLAMP_WINDOW = 1e-12

# Sum tau_13 + tau_123 conserved along every optimal trajectory, per class.
CONSERVED_TOTAL = {
    StateClass.S: 0.0,
    StateClass.B1: 0.0,
    StateClass.B3: 0.0,
    StateClass.B2: 1.0,
    StateClass.GHZ: 1.0,
    StateClass.W: 4.0 / 9.0,
}


@dataclass(frozen=True)
class TanglePair:
    tau13: float
    tau123: float


def _amps(psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[-1] != 8:
        raise ValueError(f"expected 8 amplitudes on the last axis, got shape {psi.shape}")
    return [psi[..., k] for k in range(8)]


def hyperdet(psi):
    """Cayley hyperdeterminant of the 2x2x2 amplitude tensor (norm not required).

    Evaluated in the factored form

        (a0 a7 - a1 a6 - a2 a5 + a3 a4)^2 - 4 (a0 a3 - a1 a2)(a4 a7 - a5 a6),

    which keeps relative precision when the value is tiny for sparse states.
    """
    a0, a1, a2, a3, a4, a5, a6, a7 = _amps(psi)
    return (a0 * a7 - a1 * a6 - a2 * a5 + a3 * a4) ** 2 - 4.0 * (a0 * a3 - a1 * a2) * (
        a4 * a7 - a5 * a6
    )


def hyperdet_expanded(psi):
    """The same hyperdeterminant as the usual expanded quartic in amplitude pairs."""
    a0, a1, a2, a3, a4, a5, a6, a7 = _amps(psi)
    return (
        (a0 * a7) ** 2
        + (a1 * a6) ** 2
        + (a2 * a5) ** 2
        + (a3 * a4) ** 2
        - 2.0
        * (
            (a0 * a7 + a1 * a6) * (a2 * a5 + a3 * a4)
            + a0 * a1 * a6 * a7
            + a2 * a3 * a4 * a5
        )
        + 4.0 * (a0 * a3 * a5 * a6 + a1 * a2 * a4 * a7)
    )


def _sq(x):
    return (x * np.conj(x)).real


def det_rho(which: int, psi):
    """Determinant of the single-qubit marginal of qubit ``which`` (1, 2 or 3).

    Uses the expanded quartic in amplitude pairs; for qubit 2 the diagonal
    partner sets are the ones the partial trace actually produces.
    """
    a = _amps(psi)
    n = [_sq(x) for x in a]
    if which == 1:
        diag = (
            n[0] * (n[5] + n[6] + n[7])
            + n[1] * (n[4] + n[6] + n[7])
            + n[2] * (n[4] + n[5] + n[7])
            + n[3] * (n[4] + n[5] + n[6])
        )
        cross = (
            a[0] * a[5] * np.conj(a[1] * a[4])
            + a[0] * a[6] * np.conj(a[2] * a[4])
            + a[0] * a[7] * np.conj(a[3] * a[4])
            + a[1] * a[6] * np.conj(a[2] * a[5])
            + a[1] * a[7] * np.conj(a[3] * a[5])
            + a[2] * a[7] * np.conj(a[3] * a[6])
        )
    elif which == 2:
        diag = (
            n[0] * (n[3] + n[6] + n[7])
            + n[1] * (n[2] + n[6] + n[7])
            + n[4] * (n[2] + n[3] + n[7])
            + n[5] * (n[2] + n[3] + n[6])
        )
        cross = (
            a[0] * a[3] * np.conj(a[1] * a[2])
            + a[0] * a[6] * np.conj(a[2] * a[4])
            + a[0] * a[7] * np.conj(a[2] * a[5])
            + a[1] * a[6] * np.conj(a[3] * a[4])
            + a[1] * a[7] * np.conj(a[3] * a[5])
            + a[4] * a[7] * np.conj(a[5] * a[6])
        )
    elif which == 3:
        diag = (
            n[0] * (n[3] + n[5] + n[7])
            + n[2] * (n[1] + n[5] + n[7])
            + n[4] * (n[1] + n[3] + n[7])
            + n[6] * (n[1] + n[3] + n[5])
        )
        cross = (
            a[0] * a[3] * np.conj(a[1] * a[2])
            + a[0] * a[5] * np.conj(a[1] * a[4])
            + a[0] * a[7] * np.conj(a[1] * a[6])
            + a[2] * a[5] * np.conj(a[3] * a[4])
            + a[2] * a[7] * np.conj(a[3] * a[6])
            + a[4] * a[7] * np.conj(a[5] * a[6])
        )
    else:
        raise ValueError(f"qubit index must be 1, 2 or 3, got {which}")
    return diag - 2.0 * cross.real


def det_rho2_as_printed(psi):
    """Qubit-2 determinant with the commonly printed diagonal, in which the
    partners of |a4|^2 and |a5|^2 start with |a4|^2 instead of |a2|^2.
    Kept only to quantify that misprint."""
    a = _amps(psi)
    n = [_sq(x) for x in a]
    good = det_rho(2, psi)
    return good + n[4] * (n[4] - n[2]) + n[5] * (n[4] - n[2])


def reduced_density(which: int, psi) -> np.ndarray:
    """Single-qubit reduced density matrix by explicit partial trace."""
    if which not in (1, 2, 3):
        raise ValueError(f"qubit index must be 1, 2 or 3, got {which}")
    t = np.asarray(psi, dtype=complex).reshape(np.shape(psi)[:-1] + (2, 2, 2))
    t = np.moveaxis(t, -4 + which, -3).reshape(t.shape[:-3] + (2, 4))
    return t @ np.conj(np.swapaxes(t, -1, -2))


def det_rho_traced(which: int, psi):
    return np.linalg.det(reduced_density(which, psi)).real


def det_rho_alternating(psi, include_pair_moduli=True):
    """det rho_1 - det rho_2 + det rho_3 from its collapsed closed form.

    ``include_pair_moduli=False`` drops the |a0 a7|^2 + |a1 a6|^2 + |a2 a5|^2
    + |a3 a4|^2 group, reproducing a commonly quoted but incomplete form.
    """
    a0, a1, a2, a3, a4, a5, a6, a7 = _amps(psi)
    diag = 2.0 * (
        _sq(a0) * _sq(a5) + _sq(a1) * _sq(a4) + _sq(a2) * _sq(a7) + _sq(a3) * _sq(a6)
    )
    if include_pair_moduli:
        diag = diag + (
            _sq(a0 * a7) + _sq(a1 * a6) + _sq(a2 * a5) + _sq(a3 * a4)
        )
    mixed = (
        a0 * a7 * np.conj(a1 * a6)
        + a2 * a5 * np.conj(a3 * a4)
        - (a0 * a7 - a1 * a6) * np.conj(a2 * a5 - a3 * a4)
    )
    pair = a0 * a5 * np.conj(a1 * a4) + a2 * a7 * np.conj(a3 * a6)
    return diag - 2.0 * mixed.real - 4.0 * pair.real


def _finish(value, name):
    if isinstance(value, float):
        if value < NEGATIVE_BUG_THRESHOLD:
            raise NegativeTangle(f"{name} = {value:.3e} is negative beyond round-off")
        if -CLAMP_WINDOW <= value < 0:
            return 0.0
        if 1 < value <= 1 + CLAMP_WINDOW:
            return 1.0
        return value
    value = np.asarray(value, dtype=float)
    if np.any(value < NEGATIVE_BUG_THRESHOLD):
        raise NegativeTangle(f"{name} = {value.min():.3e} is negative beyond round-off")
    value = np.where((value < 0) & (value >= -CLAMP_WINDOW), 0.0, value)
    value = np.where((value > 1) & (value <= 1 + CLAMP_WINDOW), 1.0, value)
    return float(value) if value.ndim == 0 else value


def two_tangle_13(psi):
    """Tangle between the indirectly coupled end qubits 1 and 3."""
    raw = 2.0 * (
        det_rho(1, psi) - det_rho(2, psi) + det_rho(3, psi) - np.abs(hyperdet(psi))
    )
    return _finish(raw, "tau13")


def three_tangle(psi):
    return _finish(4.0 * np.abs(hyperdet(psi)), "tau123")


def tangles(psi) -> TanglePair:
    return TanglePair(two_tangle_13(psi), three_tangle(psi))


def tau13_closed(c: StateClass, p: ChainParams, f: FieldParams, tau):
    """Closed-form 1-3 tangle along the optimal trajectory started in class ``c``."""
    c = StateClass.parse(c)
    m = mode_constants(p, f)
    if np.ndim(tau) == 0:
        tau = float(tau)
    else:
        tau = np.asarray(tau, dtype=float)
    if c in (StateClass.S, StateClass.B1, StateClass.B3):
        value = np.zeros_like(tau) if isinstance(tau, np.ndarray) else 0.0
    elif c in (StateClass.B2, StateClass.W):
        s2, _, a2 = mode_functions(m, 2, tau)
        s3, _, a3 = mode_functions(m, 3, tau)
        value = abs(np.conj(a2) * a3 + m.b0**2 * s2 * s3) ** 2
        if c is StateClass.W:
            value = 4.0 / 9.0 * value
    else:
        s1, _, a1 = mode_functions(m, 1, tau)
        s4, _, a4 = mode_functions(m, 4, tau)
        value = m.b0**2 * abs(a1 * s4 - a4 * s1) ** 2
    return _finish(float(value) if np.ndim(value) == 0 else value, "tau13")


def tau123_closed(c: StateClass, p: ChainParams, f: FieldParams, tau):
    """Closed-form 3-tangle: the class total minus the 1-3 tangle."""
    c = StateClass.parse(c)
    total = CONSERVED_TOTAL[c]
    if total == 0.0:
        return _finish(np.zeros_like(np.asarray(tau, dtype=float)), "tau123")
    return _finish(total - np.asarray(tau13_closed(c, p, f, tau)), "tau123")
