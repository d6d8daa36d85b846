"""Stationary Gaussian random periodic surfaces.

A surface is the sum of a deterministic periodic profile (a finite Fourier
series) and a zero-mean stationary Gaussian process with squared-exponential
covariance c(x-y) = sigma^2 exp(-|x-y|^2 / l^2). The random part is sampled
through a truncated Karhunen-Loeve expansion in the trigonometric eigenbasis
of the covariance operator on one period.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import ConfigError, NumericalError

SQRT_PI = np.sqrt(np.pi)

#: basis slot ordering: constant, sin_1, cos_1, sin_2, cos_2, ...
# slot i >= 1 carries frequency (i + 1) // 2.


def _slot_frequency(i: int) -> int:
    return (i + 1) // 2


@dataclass(frozen=True)
class CovarianceSpec:
    """Squared-exponential covariance model of the random surface.

    sigma is the root mean square of the fluctuation, corr_length the decay
    scale of the covariance, lambda_period the period of the grating. The
    model regime requires the correlation length to be well inside one
    period; we enforce corr_length <= lambda_period / 4.
    """

    sigma: float
    corr_length: float
    lambda_period: float = 2 * np.pi

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.corr_length <= 0:
            raise ConfigError(f"corr_length must be > 0, got {self.corr_length}")
        if self.lambda_period <= 0:
            raise ConfigError(
                f"lambda_period must be > 0, got {self.lambda_period}"
            )
        if self.corr_length > self.lambda_period / 4:
            raise ConfigError(
                "corr_length must satisfy l <= lambda_period/4 "
                f"(got l={self.corr_length}, period={self.lambda_period})"
            )


def kl_eigenvalue_closed_form(j: int, spec: CovarianceSpec) -> float:
    """Closed-form KL eigenvalue at frequency index j.

    Equals the Fourier transform of the Gaussian covariance at the j-th
    reciprocal-lattice wavenumber 2*pi*j / lambda_period:

        sqrt(pi) * sigma^2 * l * exp(-(2*pi*j/period)^2 * l^2 / 4)
    """
    if j < 0:
        raise ConfigError(f"frequency index must be >= 0, got {j}")
    w = 2 * np.pi * j / spec.lambda_period
    return SQRT_PI * spec.sigma**2 * spec.corr_length * float(
        np.exp(-(w * spec.corr_length) ** 2 / 4)
    )


def kl_eigenvalue_quadrature(
    j: int, spec: CovarianceSpec, n_quad: int = 1024
) -> float:
    """Brute-force KL eigenvalue: cosine Fourier coefficient of the
    periodized covariance, by trapezoidal quadrature on n_quad points.

    The covariance lives on the whole line; its periodization sums image
    contributions over integer shifts of the period until a shift adds less
    than 1e-14 of the peak value.
    """
    if j < 0:
        raise ConfigError(f"frequency index must be >= 0, got {j}")
    if n_quad < 256:
        raise ConfigError(f"n_quad must be >= 256, got {n_quad}")
    if spec.sigma == 0.0:
        return 0.0
    with mpmath.workdps(_QUAD_DPS):
        c_per = _periodized_gaussian_samples(
            spec.corr_length, spec.lambda_period, n_quad
        )
        sig2 = mpmath.mpf(spec.sigma) ** 2
        lam = mpmath.mpf(spec.lambda_period)
        cos_table = _cosine_table(n_quad)
        # uniform grid over a full period: trapezoid == rectangle rule
        acc = mpmath.mpf(0)
        for i, c in enumerate(c_per):
            acc += c * cos_table[(j * i) % n_quad]
        return float(acc * sig2 * lam / n_quad)


# The high-frequency eigenvalues decay like exp(-(pi j l / Lambda)^2), which
# underflows any fixed-precision cancellation floor long before j = 10 on
# smooth covariances; the quadrature therefore runs in extended precision.
_QUAD_DPS = 50


@lru_cache(maxsize=8)
def _cosine_table(n_quad):
    """cos(2 pi i / n) for i = 0..n-1 in extended precision."""
    with mpmath.workdps(_QUAD_DPS):
        return tuple(mpmath.cos(2 * mpmath.pi * i / n_quad) for i in range(n_quad))


@lru_cache(maxsize=32)
def _periodized_gaussian_samples(corr_length, lambda_period, n_quad):
    """Samples of the image-sum periodization of exp(-x^2/l^2) on a uniform
    grid over one period, as extended-precision numbers.

    Each image exp(-a (i - mn)^2), a = (Lambda/(l n))^2, is generated by the
    second-order geometric recurrence g_{i+1} = g_i t_i, t_{i+1} = t_i u with
    u = e^{-2a}: three exponentials per image instead of one per grid point.
    """
    with mpmath.workdps(_QUAD_DPS):
        l = mpmath.mpf(corr_length)
        lam = mpmath.mpf(lambda_period)
        # enough images that the farthest one is negligible at working precision
        n_img = int(mpmath.ceil(l / lam * mpmath.sqrt(_QUAD_DPS * mpmath.log(10)))) + 2
        a = (lam / (l * n_quad)) ** 2
        u = mpmath.e ** (-2 * a)
        vals = [mpmath.mpf(0)] * n_quad
        for m in range(-n_img, n_img + 1):
            c = m * n_quad
            g = mpmath.e ** (-a * c * c)
            t = mpmath.e ** (-a * (1 - 2 * c))
            for i in range(n_quad):
                vals[i] += g
                g *= t
                t *= u
        return tuple(vals)


@dataclass(frozen=True)
class KLBasis:
    """Truncated KL eigenbasis on one period.

    eigenvalues[j] is the eigenvalue at frequency j (0..order); the constant
    function occupies frequency 0, and each frequency j >= 1 contributes an
    orthonormal sin/cos pair sharing eigenvalues[j]. Total basis size is
    2*order + 1.
    """

    order: int
    eigenvalues: np.ndarray
    lambda_period: float = 2 * np.pi

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", ev)
        if self.order < 0 or len(ev) != self.order + 1:
            raise ConfigError("eigenvalues must have length order + 1")
        if np.any(ev < 0) or np.any(np.diff(ev) > 0):
            raise ConfigError("eigenvalues must be nonnegative and descending")

    @property
    def size(self) -> int:
        return 2 * self.order + 1

    def slot_eigenvalue(self, i: int) -> float:
        return float(self.eigenvalues[_slot_frequency(i)])

    def evaluate_slot(self, i: int, x) -> np.ndarray:
        """Orthonormal basis function for slot i at points x."""
        x = np.asarray(x, dtype=float)
        lam = self.lambda_period
        if i == 0:
            return np.full(x.shape, np.sqrt(1 / lam))
        j = _slot_frequency(i)
        arg = 2 * np.pi * j * x / lam
        if i % 2 == 1:
            return np.sqrt(2 / lam) * np.sin(arg)
        return np.sqrt(2 / lam) * np.cos(arg)


def build_basis(spec: CovarianceSpec, tol: float = 1e-4) -> KLBasis:
    """Smallest truncation J with eigenvalue ratio lambda_{J+1}/lambda_0 < tol.

    The ratio exp(-(2*pi*j/period)^2 l^2/4) is sigma-independent, so the rule
    also applies to the degenerate sigma = 0 case.
    """
    if not 0 < tol < 1:
        raise ConfigError(f"tol must be in (0, 1), got {tol}")
    lam, l = spec.lambda_period, spec.corr_length
    order = 0
    while True:
        w = 2 * np.pi * (order + 1) / lam
        if np.exp(-(w * l) ** 2 / 4) < tol:
            break
        order += 1
        if order > 64:
            raise NumericalError(
                "KL truncation exceeds 64 frequencies; covariance too rough"
            )
    ev = np.array([kl_eigenvalue_closed_form(j, spec) for j in range(order + 1)])
    return KLBasis(order=order, eigenvalues=ev, lambda_period=lam)


@dataclass(frozen=True)
class ProfileCoeffs:
    """Finite Fourier series c_0 + sum_p [c_{2p-1} cos(w_p x) + c_{2p} sin(w_p x)]
    with w_p = 2*pi*p / period (so w_p = p when the period is 2*pi)."""

    coeffs: np.ndarray
    period: float = 2 * np.pi

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", c)
        if len(c) % 2 != 1:
            raise ConfigError(f"coefficient vector must have odd length, got {len(c)}")
        if self.period <= 0:
            raise ConfigError("period must be > 0")

    @property
    def max_frequency(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def __call__(self, x):
        return evaluate_profile(self, x)

    def extended(self, k: int) -> "ProfileCoeffs":
        """Zero-pad the series to max frequency k (k >= current)."""
        if k < self.max_frequency:
            raise ConfigError("cannot truncate via extended()")
        out = np.zeros(2 * k + 1)
        out[: len(self.coeffs)] = self.coeffs
        return ProfileCoeffs(out, self.period)


def evaluate_profile(coeffs: ProfileCoeffs, x):
    """Evaluate the finite Fourier series at x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    c = coeffs.coeffs
    out = np.full(x.shape, c[0])
    for p in range(1, coeffs.max_frequency + 1):
        arg = 2 * np.pi * p * x / coeffs.period
        out = out + c[2 * p - 1] * np.cos(arg) + c[2 * p] * np.sin(arg)
    return out if out.shape else float(out)


@dataclass(frozen=True)
class SurfaceSample:
    """One realization: deterministic profile plus a truncated KL draw.

    draws holds the 2J+1 standard-normal variates in slot order
    (constant, sin_1, cos_1, ..., sin_J, cos_J).
    """

    deterministic: ProfileCoeffs
    basis: KLBasis
    draws: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.draws, dtype=float)
        object.__setattr__(self, "draws", d)
        if len(d) != self.basis.size:
            raise ConfigError("draws length must equal basis size 2J+1")
        if self.deterministic.period != self.basis.lambda_period:
            raise ConfigError("profile period must equal basis period")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = evaluate_profile(self.deterministic, x) * np.ones(x.shape)
        for i in range(self.basis.size):
            lam_i = self.basis.slot_eigenvalue(i)
            if lam_i == 0.0:
                continue
            out = out + np.sqrt(lam_i) * self.draws[i] * self.basis.evaluate_slot(i, x)
        return out if out.shape else float(out)

    def max_height(self, n_grid: int = 1024) -> float:
        xg = np.arange(n_grid) * self.basis.lambda_period / n_grid
        return float(self(xg).max())


def sample_surface(
    deterministic: ProfileCoeffs,
    basis: KLBasis,
    rng: np.random.Generator,
    max_redraws: int = 100,
) -> SurfaceSample:
    """Draw one surface realization, rejecting draws with min f <= 0.

    The measurement line must lie strictly above the surface, which in turn
    must stay above the source line y = 0; positivity is checked on a
    1024-point grid.
    """
    xg = np.arange(1024) * basis.lambda_period / 1024
    for _ in range(max_redraws):
        draws = rng.standard_normal(basis.size)
        sample = SurfaceSample(deterministic, basis, draws)
        if sample(xg).min() > 0:
            return sample
    raise NumericalError(
        f"no positive surface after {max_redraws} redraws; "
        "deterministic profile too low for this sigma"
    )


def project_onto_basis(
    sample_values: np.ndarray,
    mean_values: np.ndarray,
    basis: KLBasis,
) -> np.ndarray:
    """Inner products <f_m - f_mean, phi_i> for all 2J+1 basis slots.

    Both grid functions must be sampled on the same uniform grid
    x_q = q * period / Q, q = 0..Q-1, with Q >= 8*(J+1); the integral is a
    trapezoidal rule (rectangle rule on the periodic grid).
    """
    fs = np.asarray(sample_values, dtype=float)
    fm = np.asarray(mean_values, dtype=float)
    if fs.shape != fm.shape or fs.ndim != 1:
        raise ConfigError("grid functions must be 1-d arrays of equal length")
    n = len(fs)
    if n < 8 * (basis.order + 1):
        raise ConfigError(
            f"grid of {n} points too coarse for order {basis.order}"
        )
    xg = np.arange(n) * basis.lambda_period / n
    diff = fs - fm
    w = basis.lambda_period / n
    return np.array(
        [np.sum(diff * basis.evaluate_slot(i, xg)) * w for i in range(basis.size)]
    )
