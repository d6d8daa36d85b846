"""Per-sample profile reconstruction.

From a noisy near-field trace at one (wavenumber, angle) pair we extract
quasi-periodic Fourier coefficients, undo the propagation to the measurement
line (with Tikhonov-style damping of the exponentially amplified evanescent
part), and minimize the boundary-condition misfit of the truncated modal
representation over finite Fourier profiles. The minimization is a Landweber
iteration driven through a wavenumber continuation: integer-wavenumber stages
k = 1..k_max, each stage widening the coefficient vector and starting from
the previous stage's result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergedError
from .forward import Measurement
from .surface import ProfileCoeffs, evaluate_profile
from .wavefield import ModeSet, make_modes, make_plane_wave

DEFAULT_ANGLES = (-np.pi / 4, -np.pi / 8, np.pi / 12, np.pi / 8, np.pi / 4)


def rayleigh_coefficients(m: Measurement, modes: ModeSet) -> np.ndarray:
    """Quasi-periodic Fourier coefficients u_n of the trace, n = -N..N.

    u_n = (1/Lambda) int u(x, y0) e^{-i alpha_n x} dx, computed as the plain
    average over the uniform grid; exact for band-limited quasi-periodic
    traces sampled alias-free.
    """
    if m.n_points < 4 * modes.order + 4:
        raise ConfigError(
            f"grid of {m.n_points} points too coarse for order {modes.order}"
        )
    phases = np.exp(-1j * np.outer(modes.alpha_n, m.grid_x))
    return (phases * m.values[None, :]).mean(axis=1)


def regularized_psi(
    u_n: np.ndarray, modes: ModeSet, y0: float, gamma: float
) -> np.ndarray:
    """Back-propagate u_n from the measurement line to the y = 0 reference.

    Propagating modes pick up a unimodular factor e^{-i beta_n y0}; the
    evanescent back-propagation e^{+|beta_n| y0} amplifies noise and is
    damped to u_n e^{i beta_n y0} / (e^{2 i beta_n y0} + gamma), bounding the
    amplification by 1/gamma.
    """
    if gamma <= 0:
        raise ConfigError("gamma must be > 0")
    beta_n = modes.beta_n
    return np.where(
        modes.propagating,
        u_n * np.exp(-1j * beta_n * y0),
        u_n * np.exp(1j * beta_n * y0) / (np.exp(2j * beta_n * y0) + gamma),
    )


@dataclass(frozen=True)
class AngleTrace:
    """Regularized modal data for one (kappa, theta) pair."""

    psi_n: np.ndarray
    modes: ModeSet
    evanescent_regularized: np.ndarray

    @classmethod
    def from_measurement(
        cls, m: Measurement, order: int, gamma: float, wood_eps: float = 1e-3
    ) -> "AngleTrace":
        pw = make_plane_wave(m.kappa, m.theta)
        modes = make_modes(pw, m.lambda_period, order, wood_eps)
        u_n = rayleigh_coefficients(m, modes)
        psi = regularized_psi(u_n, modes, m.y0, gamma)
        return cls(
            psi_n=psi,
            modes=modes,
            evanescent_regularized=~modes.propagating,
        )


@dataclass(frozen=True)
class StageTraces:
    """All angle traces for one continuation stage (one wavenumber)."""

    traces: tuple
    gamma: float

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)


@dataclass(frozen=True)
class LandweberConfig:
    """Tuning of the continuation Landweber iteration.

    The relaxation at stage k is eta0 / k^2; the misfit truncation order and
    the L2 quadrature grid are shared across stages.
    """

    k_max: int
    angles: tuple = DEFAULT_ANGLES
    order: int = 8
    eta0: float = 0.001
    iterations: int = 500
    quad_points: int = 256
    gamma: float = 1e-6
    wood_eps: float = 1e-3

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if self.eta0 <= 0:
            raise ConfigError("eta0 must be > 0")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        q = self.quad_points
        if q < 4 * self.k_max or q & (q - 1) != 0:
            raise ConfigError(
                f"quad_points={q} must be a power of two >= 4*k_max"
            )
        if not self.angles:
            raise ConfigError("at least one incidence angle is required")

    def eta(self, k: int) -> float:
        return self.eta0 / k**2


def _misfit_fields(c: ProfileCoeffs, trace: AngleTrace, x: np.ndarray, f: np.ndarray):
    """Boundary misfit F and its height derivative G on the quadrature grid."""
    modes = trace.modes
    e = np.exp(1j * np.outer(modes.alpha_n, x) + 1j * np.outer(modes.beta_n, f))
    alpha = modes.alpha
    beta = np.real(modes.beta_n[modes.order])
    inc = np.exp(1j * alpha * x - 1j * beta * f)
    fld = trace.psi_n @ e + inc
    dfld = (1j * modes.beta_n * trace.psi_n) @ e - 1j * beta * inc
    return fld, dfld


def _profile_basis(c: ProfileCoeffs, x: np.ndarray) -> np.ndarray:
    b = np.empty((len(c.coeffs), len(x)))
    b[0] = 1.0
    for p in range(1, c.max_frequency + 1):
        arg = 2 * np.pi * p * x / c.period
        b[2 * p - 1] = np.cos(arg)
        b[2 * p] = np.sin(arg)
    return b


def objective(c: ProfileCoeffs, trace: AngleTrace, quad_points: int = 256) -> float:
    """Squared L2 boundary misfit of the truncated modal representation."""
    lam = c.period
    x = np.arange(quad_points) * lam / quad_points
    f = evaluate_profile(c, x)
    fld, _ = _misfit_fields(c, trace, x, f)
    return float(np.sum(np.abs(fld) ** 2) * lam / quad_points)


def objective_vector(
    c: ProfileCoeffs, stage: StageTraces, quad_points: int = 256
) -> np.ndarray:
    return np.array([objective(c, tr, quad_points) for tr in stage])


def jacobian(
    c: ProfileCoeffs, stage: StageTraces, quad_points: int = 256
) -> np.ndarray:
    """Exact gradient of each per-angle objective w.r.t. the coefficients.

    Row l, column p: 2 Re int conj(F_l) G_l b_p dx with b_p the Fourier basis
    function multiplying c_p, on the same grid as the objective.
    """
    lam = c.period
    x = np.arange(quad_points) * lam / quad_points
    f = evaluate_profile(c, x)
    b = _profile_basis(c, x)
    w = lam / quad_points
    rows = []
    for tr in stage:
        fld, dfld = _misfit_fields(c, tr, x, f)
        rows.append(2.0 * np.real(b @ (np.conj(fld) * dfld)) * w)
    return np.vstack(rows)


def _objective_and_jacobian(c: ProfileCoeffs, stage: StageTraces, quad_points: int):
    # fused evaluation for the iteration hot path; one field assembly per angle
    lam = c.period
    x = np.arange(quad_points) * lam / quad_points
    f = evaluate_profile(c, x)
    b = _profile_basis(c, x)
    w = lam / quad_points
    j_vec = np.empty(len(stage))
    rows = np.empty((len(stage), len(c.coeffs)))
    for l, tr in enumerate(stage):
        fld, dfld = _misfit_fields(c, tr, x, f)
        j_vec[l] = np.sum(np.abs(fld) ** 2) * w
        rows[l] = 2.0 * np.real(b @ (np.conj(fld) * dfld)) * w
    return j_vec, rows


@dataclass
class LandweberResult:
    coeffs: ProfileCoeffs
    objective_history: list = field(default_factory=list)


def landweber_run(
    c0: ProfileCoeffs, stage: StageTraces, cfg: LandweberConfig, k: int
) -> LandweberResult:
    """Fixed-count Landweber iteration c <- c - eta_k DJ^T J at stage k.

    Raises DivergedError if the summed objective exceeds 10x its initial
    value; early stopping is the only regularization beyond the data damping.
    """
    c = np.array(c0.coeffs, dtype=float)
    period = c0.period
    eta = cfg.eta(k)
    history = []
    initial = None
    for _ in range(cfg.iterations):
        pc = ProfileCoeffs(c, period)
        # overflow on a diverging iterate is caught by the check below
        with np.errstate(over="ignore", invalid="ignore"):
            j_vec, dj = _objective_and_jacobian(pc, stage, cfg.quad_points)
        total = float(j_vec.sum())
        history.append(total)
        if initial is None:
            initial = total
        elif not np.isfinite(total) or total > 10.0 * initial:
            raise DivergedError(
                f"objective grew from {initial:.3e} to {total:.3e} at stage k={k}; "
                f"eta={eta:.2e} too large"
            )
        c = c - eta * (dj.T @ j_vec)
    return LandweberResult(ProfileCoeffs(c, period), history)


@dataclass
class ReconstructionResult:
    coeffs: ProfileCoeffs
    per_stage_objective: list

    def to_json_dict(self, sample_id=None, deviation_rms=None) -> dict:
        return {
            "sample_id": sample_id,
            "k_max": self.coeffs.max_frequency,
            "coeffs": [float(v) for v in self.coeffs.coeffs],
            "per_stage_objective": self.per_stage_objective,
            "deviation_rms": deviation_rms,
        }


def continuation_reconstruct(
    measurements: dict,
    cfg: LandweberConfig,
    y0: float,
    lambda_period: float = 2 * np.pi,
) -> ReconstructionResult:
    """Wavenumber-continuation reconstruction from per-frequency traces.

    measurements maps (k, theta) to a Measurement for every integer stage
    k = 1..k_max and every configured angle. The coefficient vector starts as
    the flat profile at the measurement height and is zero-extended at each
    stage before that stage's Landweber run.
    """
    for k in range(1, cfg.k_max + 1):
        for theta in cfg.angles:
            if (k, theta) not in measurements:
                raise ConfigError(
                    f"missing measurement for stage k={k}, theta={theta}"
                )
    coeffs = ProfileCoeffs(np.array([y0]), lambda_period)
    history = []
    for k in range(1, cfg.k_max + 1):
        coeffs = coeffs.extended(k)
        traces = tuple(
            AngleTrace.from_measurement(
                measurements[(k, theta)], cfg.order, cfg.gamma, cfg.wood_eps
            )
            for theta in cfg.angles
        )
        stage = StageTraces(traces=traces, gamma=cfg.gamma)
        try:
            res = landweber_run(coeffs, stage, cfg, k)
        except DivergedError as exc:
            raise DivergedError(f"stage k={k}: {exc}") from exc
        coeffs = res.coeffs
        history.append(res.objective_history)
    return ReconstructionResult(coeffs=coeffs, per_stage_objective=history)


def deviation_rms(
    recon: ProfileCoeffs, reference, n_grid: int = 512
) -> float:
    """RMS of (reconstruction - reference) over a uniform grid.

    reference is any callable profile (the per-sample true surface, or the
    deterministic part for the degenerate sigma = 0 case).
    """
    xg = np.arange(n_grid) * recon.period / n_grid
    return float(np.sqrt(np.mean((evaluate_profile(recon, xg) - reference(xg)) ** 2)))
