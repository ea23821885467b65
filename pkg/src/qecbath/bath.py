"""Bosonic thermal bath model.

A bath is a set of harmonic modes in thermal equilibrium, coupled to a
qubit through raising/lowering exchange terms. This module provides:

- Bose-Einstein occupation numbers,
- discretization of the coupling spectrum into modes,
- the two-time bath correlation kernels,
- the explicitly integrated, time-dependent emission/absorption
  coefficients entering the second-order master equation,
- the stationary (Lindblad-limit) rates used as a validation oracle.

Units: hbar = k_B = 1; frequencies, temperatures and couplings are in
units of the reference qubit frequency omega.

The ``convention`` field selects the sign of the qubit-mode detuning in
the integrated coefficients: ``"resonant"`` uses d_k = omega - Omega_k
(co-rotating exchange, the default), ``"antiresonant"`` uses
d_k = omega + Omega_k. With the default single mode at the qubit
frequency, the resonant convention gives coefficients growing linearly
in time, i.e. the characteristic quadratic short-time decay of a qubit
exchanging energy with a resonant mode.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BathSpec", "ModeSet", "bose_occupation", "discretize_spectrum",
    "correlation_kernel", "rate_coefficients", "lindblad_rates",
]

CONVENTIONS = ("resonant", "antiresonant")


@dataclass(frozen=True)
class BathSpec:
    """Parameters of one thermal bath.

    Attributes
    ----------
    temperature : float
        Bath temperature (> 0), units of omega.
    coupling : float
        Coupling amplitude kappa >= 0. The total exchange rate scale is
        Gamma = sum_k g_k^2 = kappa^2.
    n_modes : int
        Number of discrete modes (>= 1).
    window : (float, float)
        Frequency window [Omega_min, Omega_max] over which the modes are
        spread, 0 <= Omega_min <= Omega_max. A degenerate window with
        n_modes = 1 is a single mode.
    convention : str
        "resonant" or "antiresonant" detuning convention (see module
        docstring).
    """

    temperature: float
    coupling: float
    n_modes: int = 1
    window: tuple = (1.0, 1.0)
    convention: str = "resonant"

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if self.coupling < 0:
            raise ValueError("coupling must be >= 0")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        lo, hi = self.window
        if lo < 0 or lo > hi:
            raise ValueError("window must satisfy 0 <= min <= max")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        object.__setattr__(self, "window", (float(lo), float(hi)))


@dataclass(frozen=True)
class ModeSet:
    """Discretized bath: mode frequencies and coupling amplitudes."""

    frequencies: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        g = np.asarray(self.couplings, dtype=float)
        if f.shape != g.shape or f.ndim != 1:
            raise ValueError("frequencies and couplings must be matching 1-d arrays")
        if (f < 0).any() or (g < 0).any():
            raise ValueError("mode frequencies and couplings must be >= 0")
        f.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "couplings", g)


def bose_occupation(omega, temperature):
    """Mean thermal occupation n = 1/(exp(omega/T) - 1) of a mode."""
    if omega <= 0:
        raise ValueError("omega must be > 0")
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    x = omega / temperature
    if x > 700:
        return 0.0
    return 1.0 / np.expm1(x)


def discretize_spectrum(spec):
    """Uniform flat discretization of the coupling spectrum.

    n_modes modes equally spaced on the window, each carrying equal
    weight g_k^2 = kappa^2 / n_modes, so that sum g_k^2 = kappa^2
    exactly. Deterministic for a given spec.
    """
    lo, hi = spec.window
    if spec.n_modes == 1:
        freqs = np.array([(lo + hi) / 2.0])
    else:
        freqs = np.linspace(lo, hi, spec.n_modes)
    g = np.full(spec.n_modes, spec.coupling / np.sqrt(spec.n_modes))
    return ModeSet(freqs, g)


def correlation_kernel(alpha, alpha_prime, tau, spec, qubit_omega):
    """Two-time bath correlation kernel Phi_{alpha alpha'}(tau).

    Index 1 labels the raising side of the coupling, index 2 the
    lowering side. The same-index kernels vanish; the cross kernels are

        Phi_12(tau) = sum_k g_k^2 e^{+i Omega_k tau} (n + 1)
        Phi_21(tau) = sum_k g_k^2 e^{-i Omega_k tau}  n

    with the occupation n evaluated at the attached qubit's frequency.
    """
    if alpha not in (1, 2) or alpha_prime not in (1, 2):
        raise ValueError("kernel indices must be 1 or 2")
    if alpha == alpha_prime:
        return 0.0 + 0.0j
    modes = discretize_spectrum(spec)
    g2 = modes.couplings**2
    n = bose_occupation(qubit_omega, spec.temperature)
    if (alpha, alpha_prime) == (1, 2):
        return complex(np.sum(g2 * np.exp(1j * modes.frequencies * tau)) * (n + 1.0))
    return complex(np.sum(g2 * np.exp(-1j * modes.frequencies * tau)) * n)


def _detunings(spec, qubit_omega):
    modes = discretize_spectrum(spec)
    if spec.convention == "resonant":
        d = qubit_omega - modes.frequencies
    else:
        d = qubit_omega + modes.frequencies
    return d, modes.couplings**2


def _phase_integral(t, d):
    """int_0^t e^{+i s d} ds, stable through d -> 0 (-> t)."""
    t = np.asarray(t, dtype=float)
    x = np.multiply.outer(t, d) / 2.0  # shape t x modes
    return t[..., None] * np.sinc(x / np.pi) * np.exp(1j * x)


def rate_coefficients(t, spec, qubit_omega):
    """Time-dependent emission/absorption coefficients of the master equation.

    For detunings d_k (see BathSpec.convention):

        c_down(t) = (n+1) sum_k g_k^2 int_0^t e^{+i s d_k} ds
                  = sum_k g_k^2 (-i (n+1)/d_k)(e^{+i t d_k} - 1)
        c_up(t)   =  n    sum_k g_k^2 int_0^t e^{-i s d_k} ds
                  = sum_k g_k^2 (+i  n   /d_k)(e^{-i t d_k} - 1)

    c_down multiplies the decay sandwich (sigma- rho sigma+) and c_up the
    excitation sandwich; at d_k = 0 the removable singularity evaluates
    to (n+1) g_k^2 t and n g_k^2 t. Both vanish at t = 0. 2 Re c is the
    instantaneous rate; the imaginary part is a small energy-shift term.

    Accepts a scalar or an array of times; returns (c_down, c_up).
    """
    scalar = np.isscalar(t)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if (tt < 0).any():
        raise ValueError("t must be >= 0")
    d, g2 = _detunings(spec, qubit_omega)
    n = bose_occupation(qubit_omega, spec.temperature)
    ip = _phase_integral(tt, d)  # int_0^t e^{+isd} ds per mode
    c_down = (n + 1.0) * (ip @ g2)
    c_up = n * (ip.conj() @ g2)
    if scalar:
        return complex(c_down[0]), complex(c_up[0])
    return c_down, c_up


def lindblad_rates(spec, qubit_omega):
    """Stationary-limit decay/excitation rates (gamma_down, gamma_up).

    gamma_down = Gamma (n+1), gamma_up = Gamma n with Gamma = kappa^2;
    their ratio obeys detailed balance gamma_up/gamma_down = e^{-omega/T}.
    """
    gamma = spec.coupling**2
    n = bose_occupation(qubit_omega, spec.temperature)
    return gamma * (n + 1.0), gamma * n
