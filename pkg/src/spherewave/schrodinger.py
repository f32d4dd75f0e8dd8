"""Exact-in-distribution stepping for the free stochastic Schrodinger equation on S^2.

In real/imaginary coefficient pairs one step of size h applies the rotation

    [uR]   [ cos x   sin x ] [uR]   [ W1]
    [uI] = [ -sin x  cos x ] [uI] + [-W2]

with x = sqrt(lam) h.  The noise drives only the imaginary equation, with a
minus sign; (W1, W2) carries the exact covariance of the sine/cosine kernel
convolution (no 1/sqrt(lam) damping on the sine kernel, unlike the wave case).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modes import CoefficientField, laplacian_eigenvalue, mode_degrees
from .noise import ConvFactorTable, sample_schrodinger_conv_increments
from .spectrum import PowerSpectrum


@dataclass(eq=False)
class SchrodingerState:
    real: CoefficientField
    imag: CoefficientField
    t: float = 0.0

    def __post_init__(self):
        if self.real.dim != 3 or self.imag.dim != 3:
            raise ValueError("the Schrodinger solver is defined on S^2 (dim == 3)")
        if self.real.kappa != self.imag.kappa:
            raise ValueError("real and imaginary parts must share the band limit")

    @property
    def kappa(self) -> int:
        return self.real.kappa


def init_schrodinger_state(vr: CoefficientField, vi: CoefficientField,
                           kappa: int) -> SchrodingerState:
    return SchrodingerState(vr.truncated(kappa), vi.truncated(kappa), t=0.0)


def schrodinger_step(state: SchrodingerState, h: float, ps: PowerSpectrum,
                     rng: np.random.Generator, factors: ConvFactorTable) -> SchrodingerState:
    factors.require("schrodinger", state.kappa, 3, h)
    kappa = state.kappa
    lam = np.array([-laplacian_eigenvalue(ell, 3) for ell in range(kappa + 1)])
    x = np.sqrt(lam) * h
    deg = mode_degrees(kappa, 3)
    c, s = np.cos(x)[deg], np.sin(x)[deg]
    ur, ui = state.real.data, state.imag.data
    w1, w2 = sample_schrodinger_conv_increments(ps, factors, rng)
    new_r = c * ur + s * ui + w1.data
    new_i = -s * ur + c * ui - w2.data
    return SchrodingerState(CoefficientField(new_r, kappa, 3),
                            CoefficientField(new_i, kappa, 3),
                            t=state.t + h)


def run_path_schrodinger(ps: PowerSpectrum, vr: CoefficientField, vi: CoefficientField,
                         kappa: int, T: float, steps: int, seed: int,
                         store_every: int = 1) -> list[SchrodingerState]:
    """Sample one path on the uniform grid; bit-reproducible for a given seed."""
    if steps < 1:
        raise ValueError(f"need at least one step, got {steps}")
    if not T > 0.0:
        raise ValueError(f"final time must be positive, got {T}")
    if store_every < 1:
        raise ValueError(f"store_every must be >= 1, got {store_every}")
    h = T / steps
    factors = ConvFactorTable.for_schrodinger(kappa, h)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    state = init_schrodinger_state(vr, vi, kappa)
    out = [state]
    for j in range(1, steps + 1):
        state = schrodinger_step(state, h, ps, rng, factors)
        if j % store_every == 0 or j == steps:
            out.append(state)
    return out


def mode_modulus(state: SchrodingerState) -> np.ndarray:
    """Per-degree squared modulus |uR|^2 + |uI|^2; conserved without noise."""
    return state.real.degree_power() + state.imag.degree_power()
