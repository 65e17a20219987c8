"""Simulation data: Gaussian copula vectors with gamma marginals.

Rows are i.i.d.; the latent Gaussian vector has either an equicorrelated or
an AR(1) correlation structure, and each marginal is pushed through the
standard normal CDF and the gamma(shape, 1) quantile.  Both structures are
generated by exact O(np) constructions (common factor / first-order
recursion) rather than a Cholesky factor, which gives the identical law.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from maxboot.rng import SeedSpec

__all__ = [
    "Dependence",
    "CopulaSpec",
    "DataMatrix",
    "sample_gaussian_copula",
    "gamma_quantile",
    "gamma_cdf",
    "standard_normal_cdf",
]


class Dependence(enum.Enum):
    EQUICORRELATED = "equicorrelated"
    AR1 = "ar1"


@dataclass(frozen=True)
class CopulaSpec:
    """Dependence structure and gamma-marginal shape for one experiment."""

    structure: Dependence
    rho: float
    shape_alpha: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if not self.shape_alpha > 0.0:
            raise ValueError(f"shape_alpha must be positive, got {self.shape_alpha}")


@dataclass(frozen=True)
class DataMatrix:
    """n x p observation matrix with independent rows.

    ``known_mean`` carries the true marginal mean vector when the data come
    from the simulator; statistics that center at the population mean need it.
    """

    values: np.ndarray
    known_mean: np.ndarray | None = None

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("values must be a nonempty 2-d array")
        if not np.isfinite(values).all():
            raise ValueError("data entries must be finite")
        if self.known_mean is not None:
            km = np.asarray(self.known_mean, dtype=np.float64)
            if km.shape != (values.shape[1],):
                raise ValueError("known_mean must have length p")
            if not np.isfinite(km).all():
                raise ValueError("known_mean entries must be finite")
            object.__setattr__(self, "known_mean", km)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def standard_normal_cdf(x):
    """Phi(x) through the erf-based formula; exact to full double precision."""
    if np.isscalar(x):
        return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
    return special.ndtr(np.asarray(x, dtype=np.float64))


def gamma_cdf(x, shape_alpha: float):
    """Regularized lower incomplete gamma P(shape_alpha, x) for unit scale."""
    if shape_alpha <= 0.0:
        raise ValueError("shape_alpha must be positive")
    return special.gammainc(shape_alpha, x)


def _gamma_logpdf(x: np.ndarray, a: float) -> np.ndarray:
    return (a - 1.0) * np.log(x) - x - special.gammaln(a)


def gamma_quantile(u, shape_alpha: float):
    """Inverse of ``gamma_cdf``: the gamma(shape, 1) quantile function.

    Safeguarded Newton iteration on the regularized incomplete gamma with a
    Wilson-Hilferty starting point; entries that fail to converge fall back
    to bisection.  Accepts scalars or arrays with entries in the open
    interval (0, 1).
    """
    if shape_alpha <= 0.0:
        raise ValueError("shape_alpha must be positive")
    scalar = np.isscalar(u)
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64)).ravel()
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")

    a = float(shape_alpha)
    # Wilson-Hilferty: cube of a shifted normal quantile, clamped positive.
    z = special.ndtri(u_arr)
    x = a * (1.0 - 1.0 / (9.0 * a) + z / (3.0 * math.sqrt(a))) ** 3
    x = np.maximum(x, 1e-300)

    tol = 1e-10 * u_arr
    active = np.ones(u_arr.shape, dtype=bool)
    for _ in range(40):
        xa = x[active]
        fx = special.gammainc(a, xa) - u_arr[active]
        done = np.abs(fx) <= tol[active]
        if done.any():
            act_idx = np.flatnonzero(active)
            active[act_idx[done]] = False
            xa = xa[~done]
            fx = fx[~done]
        if not active.any():
            break
        with np.errstate(over="ignore", invalid="ignore"):
            step = fx * np.exp(-_gamma_logpdf(xa, a))
        limit = xa + a + 10.0  # cap runaway steps where the density underflows
        step = np.clip(step, -limit, limit)
        x_new = xa - step
        bad = ~np.isfinite(x_new) | (x_new <= 0.0)
        x[active] = np.where(bad, xa / 2.0, x_new)

    if active.any():
        x[active] = _gamma_quantile_bisect(u_arr[active], a)

    return float(x[0]) if scalar else x.reshape(np.shape(u))


def _gamma_quantile_bisect(u: np.ndarray, a: float) -> np.ndarray:
    lo = np.full(u.shape, 1e-300)
    hi = np.full(u.shape, max(4.0 * a, 16.0))
    for _ in range(200):
        grow = special.gammainc(a, hi) < u
        if not grow.any():
            break
        hi[grow] *= 2.0
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        below = special.gammainc(a, mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def sample_gaussian_copula(spec: CopulaSpec, n: int, p: int, seed: SeedSpec) -> DataMatrix:
    """Draw n i.i.d. rows from the Gaussian copula model with gamma marginals.

    The latent normals Y have N(0,1) marginals and correlation per
    ``spec.structure``; the output is X = F^{-1}(Phi(Y)) with F the
    gamma(shape_alpha, 1) CDF, and ``known_mean`` set to shape_alpha.
    """
    if n < 1 or p < 1:
        raise ValueError("n and p must be at least 1")
    rng = seed.rng()
    rho = spec.rho
    if spec.structure is Dependence.EQUICORRELATED:
        # single common factor: Y_j = sqrt(rho) Z0 + sqrt(1-rho) Z_j
        z0 = rng.standard_normal((n, 1))
        z = rng.standard_normal((n, p))
        y = math.sqrt(rho) * z0 + math.sqrt(1.0 - rho) * z
    else:
        # stationary AR(1) recursion with N(0,1) marginals
        eps = rng.standard_normal((n, p))
        y = np.empty((n, p))
        y[:, 0] = eps[:, 0]
        c = math.sqrt(1.0 - rho * rho)
        for j in range(1, p):
            y[:, j] = rho * y[:, j - 1] + c * eps[:, j]
    x = gamma_quantile(special.ndtr(y), spec.shape_alpha)
    return DataMatrix(values=x, known_mean=np.full(p, spec.shape_alpha))
