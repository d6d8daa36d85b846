"""Direct scattering solver and measurement synthesis.

The scattered field above the grating is expanded in outgoing Rayleigh modes
referenced to y = 0; the amplitudes are fitted by least-squares collocation
of the Dirichlet condition (total field zero on the surface). Energy
conservation over the propagating modes is the external accuracy check; it
is reported, never assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IllConditionedError
from .surface import SurfaceSample
from .wavefield import ModeSet, PlaneWave, make_modes


@dataclass(frozen=True)
class RayleighCoeffs:
    """Fitted Rayleigh amplitudes, with solver self-diagnostics.

    psi_n[j] is the amplitude of mode n = j - order, referenced to y = 0.
    surface_max is the generating sample's maximum height, recorded so that
    measurement synthesis can verify y0 lies above the surface.
    """

    psi_n: np.ndarray
    modes: ModeSet
    residual_rms: float
    energy_defect: float
    surface_max: float


def solve_forward(
    sample: SurfaceSample,
    pw: PlaneWave,
    order: int,
    q_colloc: int | None = None,
    wood_eps: float = 1e-3,
) -> RayleighCoeffs:
    """Fit Rayleigh amplitudes by least-squares collocation on the surface.

    Minimizes sum_q |sum_n psi_n e^{i alpha_n x_q + i beta_n f(x_q)} +
    e^{i alpha x_q - i beta f(x_q)}|^2 over q_colloc uniform points
    (default 4*(2*order+1), twice overdetermined). Columns are equilibrated
    before the orthogonal-factorization solve; the evanescent columns decay
    like exp(-|beta_n| f) and would otherwise swamp the conditioning.
    """
    if q_colloc is None:
        q_colloc = 4 * (2 * order + 1)
    if q_colloc < 2 * (2 * order + 1):
        raise ConfigError(
            f"q_colloc={q_colloc} must be >= 2*(2*order+1)={2 * (2 * order + 1)}"
        )
    lam = sample.basis.lambda_period
    modes = make_modes(pw, lam, order, wood_eps)
    xq = np.arange(q_colloc) * lam / q_colloc
    fq = sample(xq)

    a = np.exp(
        1j * np.outer(xq, modes.alpha_n) + 1j * np.outer(fq, modes.beta_n)
    )
    rhs = -np.exp(1j * pw.alpha * xq - 1j * pw.beta * fq)
    col_scale = np.max(np.abs(a), axis=0)
    a_eq = a / col_scale
    cond = np.linalg.cond(a_eq)
    if cond > 1e12:
        raise IllConditionedError(
            f"collocation condition estimate {cond:.2e} exceeds 1e12; "
            "reduce the mode order for this surface/wavenumber regime"
        )
    sol, *_ = np.linalg.lstsq(a_eq, rhs, rcond=None)
    psi = sol / col_scale

    residual = a @ psi - rhs
    residual_rms = float(np.sqrt(np.mean(np.abs(residual) ** 2)))
    eff = _efficiencies(psi, modes, pw.beta)
    return RayleighCoeffs(
        psi_n=psi,
        modes=modes,
        residual_rms=residual_rms,
        energy_defect=float(abs(eff.sum() - 1.0)),
        surface_max=sample.max_height(),
    )


def _efficiencies(psi: np.ndarray, modes: ModeSet, beta: float) -> np.ndarray:
    return np.where(
        modes.propagating,
        np.real(modes.beta_n) / beta * np.abs(psi) ** 2,
        0.0,
    )


def reflection_efficiencies(rc: RayleighCoeffs) -> np.ndarray:
    """Grating efficiencies e_n = (Re beta_n / beta) |psi_n|^2; zero for
    evanescent modes. Their sum is 1 for a converged lossless solve."""
    beta = float(np.real(rc.modes.beta_n[rc.modes.order]))
    # beta of the incident wave equals Re beta_0 of the specular mode
    return _efficiencies(rc.psi_n, rc.modes, beta)


@dataclass(frozen=True)
class Measurement:
    """Sampled (noisy) near-field trace u(x_j, y0) for one (kappa, theta)."""

    kappa: float
    theta: float
    y0: float
    lambda_period: float
    grid_x: np.ndarray
    values: np.ndarray
    noise_tau: float = 0.0

    @property
    def n_points(self) -> int:
        return len(self.grid_x)

    def to_json_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "theta": self.theta,
            "y0": self.y0,
            "lambda_period": self.lambda_period,
            "tau": self.noise_tau,
            "grid": [float(x) for x in self.grid_x],
            "re": [float(v) for v in self.values.real],
            "im": [float(v) for v in self.values.imag],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "Measurement":
        return cls(
            kappa=d["kappa"],
            theta=d["theta"],
            y0=d["y0"],
            lambda_period=d["lambda_period"],
            grid_x=np.asarray(d["grid"], dtype=float),
            values=np.asarray(d["re"], dtype=float)
            + 1j * np.asarray(d["im"], dtype=float),
            noise_tau=d["tau"],
        )

    @classmethod
    def from_json(cls, s: str) -> "Measurement":
        return cls.from_json_dict(json.loads(s))


def synthesize_measurement(
    rc: RayleighCoeffs,
    y0: float,
    n_points: int,
    tau: float,
    rng: np.random.Generator | None = None,
) -> Measurement:
    """Evaluate the scattered field on the measurement line and add noise.

    u(x_j, y0) = sum_n psi_n e^{i beta_n y0} e^{i alpha_n x_j}, each value
    then scaled by (1 + tau * rand_j) with rand_j uniform on [-1, 1], one
    independent real draw per grid point.
    """
    if y0 <= rc.surface_max:
        raise ConfigError(
            f"measurement line y0={y0} must lie above the surface "
            f"(max height {rc.surface_max})"
        )
    # the grid must resolve every synthesized mode alias-free; the stricter
    # 4N+4 rule for extraction applies at the (smaller) inversion order
    if n_points < 2 * rc.modes.order + 2 or n_points & (n_points - 1) != 0:
        raise ConfigError(
            f"n_points={n_points} must be a power of two >= {2 * rc.modes.order + 2}"
        )
    if tau < 0:
        raise ConfigError("tau must be >= 0")
    lam = rc.modes.lambda_period
    xg = np.arange(n_points) * lam / n_points
    amps = rc.psi_n * np.exp(1j * rc.modes.beta_n * y0)
    u = amps @ np.exp(1j * np.outer(rc.modes.alpha_n, xg))
    if tau > 0:
        if rng is None:
            raise ConfigError("rng required when tau > 0")
        u = u * (1.0 + tau * rng.uniform(-1.0, 1.0, n_points))
    theta = float(np.arcsin(rc.modes.alpha / rc.modes.kappa))
    return Measurement(
        kappa=rc.modes.kappa,
        theta=theta,
        y0=y0,
        lambda_period=lam,
        grid_x=xg,
        values=u,
        noise_tau=tau,
    )


def standoff_height(surface_max: float, standoff: float = 0.1) -> float:
    """Measurement height rule: surface max plus a fixed standoff, rounded
    up to one decimal so heights are comparable across samples."""
    return float(np.ceil((surface_max + standoff) * 10.0) / 10.0)
