"""Hamiltonian, analytic time-optimal propagator and evolved class amplitudes.

Basis convention: |0> is the +1 eigenvector of sigma_z and the amplitude
index of |q1 q2 q3> is 4*q1 + 2*q2 + q3. States are plain complex arrays of
shape (8,), or (n, 8) for a batch of times.
"""
from __future__ import annotations

import cmath
import enum
import math

import numpy as np

from .model import (
    MODES,
    ChainParams,
    FieldParams,
    chain_hamiltonian,
    field_vector,
    mode_constants,
    mode_functions,
    omega_k_sq,
)

# Amplitude index of |q1 0 q3> for each mode; the middle-|1> partner is +2.
MODE_BASE = {1: 0, 2: 1, 3: 4, 4: 5}


class StateClass(enum.Enum):
    S = "s"
    B1 = "b1"
    B2 = "b2"
    B3 = "b3"
    W = "w"
    GHZ = "ghz"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown state class {text!r}; expected one of "
                + ", ".join(c.value for c in cls)
            ) from None


# (mode, middle bit) components of each representative, equal weights.
_COMPONENTS = {
    StateClass.S: ((1, 0),),
    StateClass.B1: ((2, 0), (1, 1)),
    StateClass.B2: ((2, 0), (3, 0)),
    StateClass.B3: ((1, 1), (3, 0)),
    StateClass.W: ((2, 0), (1, 1), (3, 0)),
    StateClass.GHZ: ((1, 0), (4, 1)),
}


def representative_state(c: StateClass) -> np.ndarray:
    """Normalized representative of an entanglement class, e.g. GHZ -> (|000>+|111>)/sqrt2."""
    comps = _COMPONENTS[StateClass.parse(c)]
    psi = np.zeros(8, dtype=complex)
    for mode, bit in comps:
        psi[MODE_BASE[mode] + 2 * bit] = 1.0
    return psi / math.sqrt(len(comps))


def field_at(p: ChainParams, f: FieldParams, tau) -> np.ndarray:
    omega_k_sq(p)
    return field_vector(p, f, tau)


def hamiltonian_at(p: ChainParams, f: FieldParams, tau: float) -> np.ndarray:
    return chain_hamiltonian(p.k_ratio, field_at(p, f, tau))


def u_opt(p: ChainParams, f: FieldParams, tau) -> np.ndarray:
    """Analytic time-optimal evolution operator U(tau), shape (8, 8) or (n, 8, 8).

    Within each mode the middle-qubit block is, up to exp(-i*Omega*tau/2),

        [[ conj(a_i),                 -i B0 exp(-i theta0) s_i ],
         [ -i B0 exp(i theta(tau)) s_i,  exp(i Omega tau) a_i    ]]

    and blocks of different modes never couple.
    """
    m = mode_constants(p, f)
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    theta = m.omega_big * tau_arr + m.theta0
    phase = np.exp(-0.5j * m.omega_big * tau_arr)
    u = np.zeros((tau_arr.size, 8, 8), dtype=complex)
    for i in MODES:
        s, _, a = mode_functions(m, i, tau_arr)
        lo = MODE_BASE[i]
        hi = lo + 2
        u[:, lo, lo] = np.conj(a)
        u[:, hi, hi] = np.exp(1j * m.omega_big * tau_arr) * a
        u[:, hi, lo] = -1j * m.b0 * np.exp(1j * theta) * s
        u[:, lo, hi] = -1j * m.b0 * np.exp(-1j * m.theta0) * s
    u *= phase[:, None, None]
    return u[0] if np.ndim(tau) == 0 else u


def evolve_class(c: StateClass, p: ChainParams, f: FieldParams, tau) -> np.ndarray:
    """Closed-form evolved amplitudes of a class representative.

    Each component |mode i, middle b> of the representative maps to two
    amplitudes; middle |0> gives (conj(a_i), -i B0 e^{i theta} s_i) and
    middle |1> gives (-i B0 e^{-i theta0} s_i, e^{i Omega tau} a_i), all
    times exp(-i Omega tau / 2).
    """
    comps = _COMPONENTS[StateClass.parse(c)]
    m = mode_constants(p, f)
    if np.ndim(tau) == 0 and np.ndim(m.b0) == 0 and np.ndim(m.omega_big) == 0:
        return _evolve_class_scalar(comps, m, float(tau))
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    theta = m.omega_big * tau_arr + m.theta0
    weight = 1.0 / math.sqrt(len(comps))
    out = np.zeros((tau_arr.size, 8), dtype=complex)
    for mode, bit in comps:
        s, _, a = mode_functions(m, mode, tau_arr)
        lo = MODE_BASE[mode]
        if bit == 0:
            out[:, lo] += np.conj(a)
            out[:, lo + 2] += -1j * m.b0 * np.exp(1j * theta) * s
        else:
            out[:, lo] += -1j * m.b0 * np.exp(-1j * m.theta0) * s
            out[:, lo + 2] += np.exp(1j * m.omega_big * tau_arr) * a
    out *= weight * np.exp(-0.5j * m.omega_big * tau_arr)[:, None]
    return out[0] if np.ndim(tau) == 0 else out


def _evolve_class_scalar(comps, m, tau):
    theta = m.omega_big * tau + m.theta0
    out = np.zeros(8, dtype=complex)
    for mode, bit in comps:
        s, _, a = mode_functions(m, mode, tau)
        lo = MODE_BASE[mode]
        if bit == 0:
            out[lo] += a.conjugate()
            out[lo + 2] += -1j * m.b0 * cmath.exp(1j * theta) * s
        else:
            out[lo] += -1j * m.b0 * cmath.exp(-1j * m.theta0) * s
            out[lo + 2] += cmath.exp(1j * m.omega_big * tau) * a
    return out * (cmath.exp(-0.5j * m.omega_big * tau) / math.sqrt(len(comps)))


def evolve_general(psi0, p: ChainParams, f: FieldParams, tau) -> np.ndarray:
    """U(tau) @ psi0 for any initial state; shape follows ``tau``."""
    psi0 = np.asarray(psi0, dtype=complex)
    u = u_opt(p, f, tau)
    return u @ psi0
