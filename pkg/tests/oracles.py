"""Independent reference computations used across the test suite.

Nothing here shares code with the package: Legendre values come from symbolic
differentiation of the generating polynomial, covariance entries from adaptive
quadrature of the kernel products, and norms from plain dense sums.
"""

import math

import numpy as np
import sympy as sp
from scipy import integrate


def rodrigues_legendre(ell: int, mu: float) -> float:
    """P_ell(mu) by differentiating (mu^2 - 1)^ell symbolically."""
    x = sp.Symbol("x")
    expr = sp.diff((x**2 - 1) ** ell, x, ell) / (2**ell * sp.factorial(ell))
    return float(expr.subs(x, sp.Rational(mu).limit_denominator(10**12)))


def symbolic_assoc_legendre(ell: int, m: int, mu: float) -> float:
    """P_{ell,m}(mu) with the Condon-Shortley phase, from the defining formula."""
    x = sp.Symbol("x")
    p_ell = sp.diff((x**2 - 1) ** ell, x, ell) / (2**ell * sp.factorial(ell))
    expr = (-1) ** m * (1 - x**2) ** sp.Rational(m, 2) * sp.diff(p_ell, x, m)
    return float(expr.subs(x, sp.Rational(mu).limit_denominator(10**12)).evalf(30))


def normalization_factor(ell: int, m: int) -> float:
    """sqrt((2 ell + 1)/(4 pi) (ell-m)!/(ell+m)!) via exact integers."""
    ratio = math.factorial(ell - m) / math.factorial(ell + m)
    return math.sqrt((2 * ell + 1) / (4 * math.pi) * ratio)


def wave_kernels(lam: float):
    if lam == 0.0:
        return (lambda s: s, lambda s: np.ones_like(np.asarray(s, dtype=float)))
    sq = math.sqrt(lam)
    return (lambda s: np.sin(sq * s) / sq, lambda s: np.cos(sq * s))


def schrodinger_kernels(lam: float):
    if lam == 0.0:
        return (lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                lambda s: np.ones_like(np.asarray(s, dtype=float)))
    sq = math.sqrt(lam)
    return (lambda s: np.sin(sq * s), lambda s: np.cos(sq * s))


def conv_covariance_quadrature(kernels, lam: float, t: float) -> np.ndarray:
    """2x2 covariance entries int_0^t R_i(s) R_j(s) ds by panelled adaptive quadrature.

    Panels of length at most pi/sqrt(lam) keep the integrand non-oscillatory
    within each call, so the result is reliable for strongly oscillatory modes.
    """
    r1, r2 = kernels(lam)
    n_panels = max(1, int(math.ceil(math.sqrt(lam) * t / math.pi))) if lam > 0 else 1
    edges = np.linspace(0.0, t, n_panels + 1)
    out = np.zeros((2, 2))
    for a, b in zip(edges[:-1], edges[1:]):
        out[0, 0] += integrate.quad(lambda s: r1(s) ** 2, a, b, epsabs=1e-13, epsrel=1e-13)[0]
        out[0, 1] += integrate.quad(lambda s: r1(s) * r2(s), a, b, epsabs=1e-13, epsrel=1e-13)[0]
        out[1, 1] += integrate.quad(lambda s: r2(s) ** 2, a, b, epsabs=1e-13, epsrel=1e-13)[0]
    out[1, 0] = out[0, 1]
    return out
