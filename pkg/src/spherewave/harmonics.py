"""Legendre functions, sphere grids, and synthesis of coefficient fields on S^2.

The real orthonormal basis of degree ell is

    Y_{ell,0}          = Lbar_{ell,0}(theta)
    sqrt(2) * Lbar_{ell,m}(theta) * cos(m phi),   m = 1..ell
    sqrt(2) * Lbar_{ell,m}(theta) * sin(m phi),   m = 1..ell

where Lbar_{ell,m}(theta) = sqrt((2 ell + 1)/(4 pi) (ell-m)!/(ell+m)!)
P_{ell,m}(cos theta) and P_{ell,m} carries the Condon-Shortley phase (-1)^m.
All normalization factors are folded into the recurrences; raw factorials are
never formed, so degrees in the thousands stay in range.

Grids are Gauss-Legendre in cos(theta) and uniform in phi, which makes the
quadrature exact for band-limited products and the discrete basis exactly
orthonormal at finite resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modes import CoefficientField, laplacian_eigenvalue, harmonic_dimension  # noqa: F401

FOUR_PI = 4.0 * math.pi

# Synthesis guard: tables above this band limit are a sign of a misconfigured run.
MAX_SYNTHESIS_BAND = 4096


def legendre(ell: int, mu):
    """Legendre polynomial P_ell(mu) by the three-term recurrence, P_ell(1) = 1."""
    if ell < 0:
        raise ValueError(f"degree must be non-negative, got {ell}")
    mu = np.asarray(mu, dtype=float)
    if np.any(np.abs(mu) > 1.0):
        raise ValueError("argument must lie in [-1, 1]")
    p_prev = np.ones_like(mu)
    if ell == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = mu.copy()
    for n in range(1, ell):
        p, p_prev = ((2 * n + 1) * mu * p - n * p_prev) / (n + 1), p
    return p if p.ndim else float(p)


def assoc_legendre(ell: int, m: int, mu):
    """Associated Legendre function P_{ell,m}(mu) with the (-1)^m phase.

    Stable recurrence in ell at fixed m.  Unnormalized, so the seed
    (2m-1)!! overflows double precision around m = 150; use
    normalized_legendre for large orders.
    """
    if ell < 0 or not 0 <= m <= ell:
        raise ValueError(f"need 0 <= m <= ell, got ell={ell}, m={m}")
    mu = np.asarray(mu, dtype=float)
    if np.any(np.abs(mu) > 1.0):
        raise ValueError("argument must lie in [-1, 1]")
    # P_{m,m} = (-1)^m (2m-1)!! (1 - mu^2)^(m/2)
    pmm = np.ones_like(mu)
    if m > 0:
        s = np.sqrt((1.0 - mu) * (1.0 + mu))
        for k in range(1, m + 1):
            pmm = -pmm * (2 * k - 1) * s
    if ell == m:
        return pmm if pmm.ndim else float(pmm)
    pm1 = mu * (2 * m + 1) * pmm
    if ell == m + 1:
        return pm1 if pm1.ndim else float(pm1)
    for n in range(m + 2, ell + 1):
        pm1, pmm = ((2 * n - 1) * mu * pm1 - (n + m - 1) * pmm) / (n - m), pm1
    return pm1 if pm1.ndim else float(pm1)


def _normalized_diag_seed(m: int, sin_t, prev):
    """Lbar_{m,m} from Lbar_{m-1,m-1}; carries normalization and phase."""
    return -math.sqrt((2 * m + 1) / (2.0 * m)) * sin_t * prev


def normalized_legendre(ell: int, m: int, theta: float) -> float:
    """Fully normalized associated Legendre function Lbar_{ell,m}(theta).

    Lbar_{0,0} = 1/sqrt(4 pi); the basis functions built from Lbar are
    orthonormal on the sphere.  Safe for degrees of a few thousand.
    """
    if ell < 0 or not 0 <= m <= ell:
        raise ValueError(f"need 0 <= m <= ell, got ell={ell}, m={m}")
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"colatitude must lie in [0, pi], got {theta}")
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    p = 1.0 / math.sqrt(FOUR_PI)
    for k in range(1, m + 1):
        p = _normalized_diag_seed(k, sin_t, p)
    if ell == m:
        return p
    p1 = math.sqrt(2 * m + 3.0) * cos_t * p
    if ell == m + 1:
        return p1
    for n in range(m + 2, ell + 1):
        a = math.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
        b = math.sqrt((2.0 * n + 1.0) / (2.0 * n - 3.0)
                      * ((n - 1.0) ** 2 - m * m) / (n * n - m * m))
        p1, p = a * cos_t * p1 - b * p, p1
    return p1


def _pair_offsets(kappa: int) -> np.ndarray:
    """Row offset of order m in the packed (m-major) table of (ell, m) pairs."""
    m = np.arange(kappa + 2)
    return m * (kappa + 1) - m * (m - 1) // 2


def normalized_legendre_table(kappa: int, theta: np.ndarray) -> np.ndarray:
    """Lbar_{ell,m} for all ell <= kappa, m <= ell, at each colatitude.

    Returns an array of shape (n_pairs, n_theta) packed m-major: row
    _pair_offsets(kappa)[m] + (ell - m) holds (ell, m).
    """
    theta = np.asarray(theta, dtype=float)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    offsets = _pair_offsets(kappa)
    table = np.empty((offsets[-1], theta.size))
    diag = np.full(theta.size, 1.0 / math.sqrt(FOUR_PI))
    for m in range(kappa + 1):
        if m > 0:
            diag = _normalized_diag_seed(m, sin_t, diag)
        base = offsets[m]
        table[base] = diag
        if m < kappa:
            table[base + 1] = math.sqrt(2 * m + 3.0) * cos_t * diag
        for n in range(m + 2, kappa + 1):
            a = math.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            b = math.sqrt((2.0 * n + 1.0) / (2.0 * n - 3.0)
                          * ((n - 1.0) ** 2 - m * m) / (n * n - m * m))
            row = base + n - m
            table[row] = a * cos_t * table[row - 1] - b * table[row - 2]
    return table


@dataclass(eq=False)
class SphereGrid:
    """Gauss-Legendre x uniform grid on S^2 with quadrature weights."""

    n_theta: int
    n_phi: int
    theta: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)
    theta_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("grid sizes must be positive")
        nodes, weights = np.polynomial.legendre.leggauss(self.n_theta)
        # leggauss returns ascending cos(theta); store theta ascending instead
        self.theta = np.arccos(nodes[::-1])
        self.theta_weights = weights[::-1].copy()
        self.phi = 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi
        self._basis_tables: dict[int, np.ndarray] = {}

    @property
    def phi_weight(self) -> float:
        return 2.0 * math.pi / self.n_phi

    def weights(self) -> np.ndarray:
        """Full quadrature weight matrix, summing to 4 pi."""
        return np.outer(self.theta_weights, np.full(self.n_phi, self.phi_weight))

    def integrate(self, values: np.ndarray) -> float:
        return float(self.theta_weights @ values.sum(axis=1)) * self.phi_weight

    def basis_table(self, kappa: int) -> np.ndarray:
        """Cached normalized Legendre table at this grid's colatitudes."""
        if kappa not in self._basis_tables:
            self._basis_tables[kappa] = normalized_legendre_table(kappa, self.theta)
        return self._basis_tables[kappa]


@dataclass(eq=False)
class GridField:
    """Real values sampled on a SphereGrid."""

    values: np.ndarray
    grid: SphereGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_theta, self.grid.n_phi):
            raise ValueError(
                f"values have shape {self.values.shape}, grid expects "
                f"({self.grid.n_theta}, {self.grid.n_phi})"
            )


def synthesize(coeffs: CoefficientField, grid: SphereGrid) -> GridField:
    """Evaluate a coefficient field pointwise on the grid (S^2 only).

    The phi sums are separated from the theta sums, so the cost is
    O(kappa^2 n_theta) + O(kappa n_theta n_phi).
    """
    if coeffs.dim != 3:
        raise ValueError(f"pointwise synthesis is available for dim == 3 only, got dim={coeffs.dim}")
    kappa = coeffs.kappa
    if kappa > MAX_SYNTHESIS_BAND:
        raise ValueError(f"band limit {kappa} exceeds synthesis maximum {MAX_SYNTHESIS_BAND}")
    table = grid.basis_table(kappa)
    offsets = _pair_offsets(kappa)
    data = coeffs.data
    # per-order theta profiles: A[m] = sum_ell c_cos Lbar, B[m] = sum_ell c_sin Lbar
    a = np.zeros((kappa + 1, grid.n_theta))
    b = np.zeros((kappa + 1, grid.n_theta))
    ells = np.arange(kappa + 1)
    bases = ells * ells
    a[0] = data[bases] @ table[offsets[0]:offsets[1]]
    for m in range(1, kappa + 1):
        block = table[offsets[m]:offsets[m + 1]]
        idx = bases[m:] + 2 * m - 1
        a[m] = data[idx] @ block
        b[m] = data[idx + 1] @ block
    fac = np.full(kappa + 1, math.sqrt(2.0))
    fac[0] = 1.0
    m_phi = np.outer(np.arange(kappa + 1), grid.phi)
    values = (fac[:, None] * a).T @ np.cos(m_phi) + (fac[:, None] * b).T @ np.sin(m_phi)
    return GridField(values, grid)


def grid_l2_norm(f: GridField) -> float:
    """L^2 norm via the grid quadrature weights."""
    return math.sqrt(max(f.grid.integrate(f.values**2), 0.0))


def grid_max_abs(f: GridField) -> float:
    return float(np.max(np.abs(f.values)))
