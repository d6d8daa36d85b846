"""Plane-wave incidence and the quasi-periodic mode lattice.

The scattered field above a grating of period Lambda decomposes into modes
exp(i alpha_n x + i beta_n y) with alpha_n = alpha + 2*pi*n/Lambda and
beta_n = sqrt(kappa^2 - alpha_n^2) on the branch with Re >= 0, Im >= 0
(outgoing or decaying). Configurations with beta_n ~ 0 (Wood anomalies) are
rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError, WoodAnomalyError


@dataclass(frozen=True)
class PlaneWave:
    """Incident plane wave exp(i(alpha x - beta y))."""

    kappa: float
    theta: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be > 0, got {self.kappa}")
        if not -np.pi / 2 < self.theta < np.pi / 2:
            raise ConfigError(
                f"theta must lie in the open interval (-pi/2, pi/2), got {self.theta}"
            )

    @property
    def alpha(self) -> float:
        return self.kappa * np.sin(self.theta)

    @property
    def beta(self) -> float:
        return self.kappa * np.cos(self.theta)


def make_plane_wave(kappa: float, theta: float) -> PlaneWave:
    return PlaneWave(kappa=kappa, theta=theta)


def incident_field(pw: PlaneWave, x, y):
    """Incident field exp(i(alpha x - beta y))."""
    return np.exp(1j * (pw.alpha * np.asarray(x) - pw.beta * np.asarray(y)))


def _beta_branch(kappa: float, alpha_n: np.ndarray) -> np.ndarray:
    # principal branch: positive real for propagating, positive imaginary
    # for evanescent modes
    return np.where(
        np.abs(alpha_n) < kappa,
        np.sqrt(np.maximum(kappa**2 - alpha_n**2, 0.0)).astype(complex),
        1j * np.sqrt(np.maximum(alpha_n**2 - kappa**2, 0.0)),
    )


@dataclass(frozen=True)
class ModeSet:
    """Mode lattice (alpha_n, beta_n) for n = -N..N at one (kappa, theta)."""

    order: int
    alpha_n: np.ndarray
    beta_n: np.ndarray
    kappa: float
    lambda_period: float

    @property
    def n_indices(self) -> np.ndarray:
        return np.arange(-self.order, self.order + 1)

    @property
    def alpha(self) -> float:
        """Quasi-momentum of the n = 0 mode."""
        return float(self.alpha_n[self.order])

    @property
    def propagating(self) -> np.ndarray:
        return np.abs(self.alpha_n) < self.kappa


def make_modes(
    pw: PlaneWave,
    lambda_period: float,
    order: int,
    wood_eps: float = 1e-3,
) -> ModeSet:
    """Build the mode lattice, rejecting Wood-anomalous configurations.

    Raises WoodAnomalyError when some | |alpha_n| - kappa | <= wood_eps;
    beta_n would then be near zero and 1/beta_n terms blow up downstream.
    """
    if order < 1:
        raise ConfigError(f"order must be >= 1, got {order}")
    if wood_eps <= 0:
        raise ConfigError("wood_eps must be > 0")
    if lambda_period <= 0:
        raise ConfigError("lambda_period must be > 0")
    n = np.arange(-order, order + 1)
    alpha_n = pw.alpha + 2 * np.pi * n / lambda_period
    bad = np.abs(np.abs(alpha_n) - pw.kappa) <= wood_eps
    if bad.any():
        raise WoodAnomalyError(n[bad], pw.kappa, pw.theta)
    return ModeSet(
        order=order,
        alpha_n=alpha_n,
        beta_n=_beta_branch(pw.kappa, alpha_n),
        kappa=pw.kappa,
        lambda_period=lambda_period,
    )


def green_quasiperiodic(
    modes: ModeSet,
    x: float,
    y: float,
    s: float,
    t: float,
    g_min: float = 0.1,
    tail_tol: float = 1e-12,
) -> complex:
    """Quasi-periodic Green's function by its spectral (Rayleigh) series.

    G = i/(2*Lambda) * sum_n (1/beta_n) exp(i alpha_n (x-s) + i beta_n |y-t|),
    evaluated off the source line (|y - t| >= g_min). The truncation is
    raised internally (up to 4x the mode-set order) until the first omitted
    evanescent term falls below tail_tol.
    """
    dy = abs(y - t)
    if dy < g_min:
        raise ConfigError(
            f"Green's series evaluated too close to the source line: |y-t|={dy} < {g_min}"
        )
    lam = modes.lambda_period
    kappa = modes.kappa
    alpha = modes.alpha
    order = modes.order
    while True:
        n = np.arange(-order, order + 1)
        alpha_n = alpha + 2 * np.pi * n / lam
        beta_n = _beta_branch(kappa, alpha_n)
        # first omitted term, on each side of the lattice
        tail = 0.0
        for a_next in (alpha + 2 * np.pi * (order + 1) / lam,
                       alpha - 2 * np.pi * (order + 1) / lam):
            b_next = _beta_branch(kappa, np.array([a_next]))[0]
            tail = max(
                tail,
                float(np.exp(-b_next.imag * dy) / abs(b_next)) / (2 * lam),
            )
        if tail < tail_tol:
            break
        if order >= 4 * modes.order:
            raise NumericalError(
                f"Green's series tail {tail:.2e} not below {tail_tol:.1e} at 4x order"
            )
        order *= 2
    terms = np.exp(1j * alpha_n * (x - s) + 1j * beta_n * dy) / beta_n
    return complex(1j / (2 * lam) * terms.sum())
