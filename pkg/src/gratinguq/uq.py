"""Monte Carlo ensemble, covariance estimation, and statistics recovery.

Each sample draws a surface realization, synthesizes noisy multi-frequency
measurements, and reconstructs a Fourier profile; the ensemble then yields
the mean profile, the pointwise standard deviation, the empirical covariance
matrix in the KL basis, its eigenvalues, and closed-form estimates of the
root mean square and correlation length.

Per-sample work is a pure function of (problem, master_seed, sample index),
so results are bit-identical regardless of worker count or scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConfigError,
    IllConditionedError,
    NumericalError,
    OrderViolationError,
)
from .forward import solve_forward, standoff_height, synthesize_measurement
from .inverse import (
    LandweberConfig,
    continuation_reconstruct,
    deviation_rms,
)
from .surface import (
    CovarianceSpec,
    KLBasis,
    ProfileCoeffs,
    SurfaceSample,
    build_basis,
    evaluate_profile,
    project_onto_basis,
    sample_surface,
)
from .wavefield import make_plane_wave

SQRT_PI = np.sqrt(np.pi)


@dataclass(frozen=True)
class EnsembleProblem:
    """Everything one Monte Carlo sample needs, minus the random seed."""

    spec: CovarianceSpec
    deterministic: ProfileCoeffs
    landweber: LandweberConfig
    tau: float = 0.001
    n_measure: int = 128
    forward_order: int = 48
    standoff: float = 0.1
    kl_tol: float = 1e-4
    energy_tol: float = 1e-3

    def basis(self) -> KLBasis:
        return build_basis(self.spec, self.kl_tol)


def sample_rng(master_seed: int, m: int) -> np.random.Generator:
    """Per-sample generator derived deterministically from (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, m)))


def _solve_converged(sample, pw, problem):
    """Forward-solve at an order that is well-conditioned and energy-conserving.

    Tall samples can push the collocation conditioning past its limit at the
    default order, so the ladder first steps the order down (the surface then
    needs fewer resolvable evanescent modes than the conditioning allows) and
    only grows it if the energy identity flags a truncation problem.
    """
    base = problem.forward_order
    orders = [base] + list(range(base - 8, 15, -8)) \
        + [int(base * 1.5), 2 * base]
    best = None
    for order in orders:
        try:
            rc = solve_forward(sample, pw, order)
        except IllConditionedError:
            continue
        if rc.energy_defect < problem.energy_tol:
            return rc
        if best is None or rc.energy_defect < best.energy_defect:
            best = rc
    if best is None:
        raise IllConditionedError(
            f"no well-conditioned mode order found at kappa={pw.kappa}, "
            f"theta={pw.theta} for this sample"
        )
    return best


def synthesize_sample_measurements(
    sample: SurfaceSample, problem: EnsembleProblem, rng: np.random.Generator
):
    """Forward-solve and sample the near field for every (stage, angle).

    Returns (measurements dict keyed by (k, theta), y0).
    """
    y0 = standoff_height(sample.max_height(), problem.standoff)
    cfg = problem.landweber
    measurements = {}
    for k in range(1, cfg.k_max + 1):
        for theta in cfg.angles:
            pw = make_plane_wave(float(k), theta)
            rc = _solve_converged(sample, pw, problem)
            measurements[(k, theta)] = synthesize_measurement(
                rc, y0, problem.n_measure, problem.tau,
                rng if problem.tau > 0 else None,
            )
    return measurements, y0


def reconstruct_sample(
    sample: SurfaceSample, problem: EnsembleProblem, rng: np.random.Generator
) -> ProfileCoeffs:
    """Default per-sample pipeline: synthesize data, then invert."""
    measurements, y0 = synthesize_sample_measurements(sample, problem, rng)
    res = continuation_reconstruct(
        measurements, problem.landweber, y0, sample.basis.lambda_period
    )
    return res.coeffs


def ground_truth_reconstructor(
    sample: SurfaceSample, problem: EnsembleProblem, rng: np.random.Generator
) -> ProfileCoeffs:
    """Bypass the inversion entirely: return the sample's exact Fourier
    coefficients. Used to isolate the statistics pipeline."""
    return sample_to_coeffs(sample)


def sample_to_coeffs(sample: SurfaceSample) -> ProfileCoeffs:
    """Exact Fourier coefficients of a KL sample (deterministic + draw)."""
    basis = sample.basis
    k = max(sample.deterministic.max_frequency, basis.order)
    c = np.array(sample.deterministic.extended(k).coeffs)
    lam = basis.lambda_period
    for i in range(basis.size):
        amp = np.sqrt(basis.slot_eigenvalue(i)) * sample.draws[i]
        j = (i + 1) // 2
        if i == 0:
            c[0] += amp * np.sqrt(1 / lam)
        elif i % 2 == 1:
            c[2 * j] += amp * np.sqrt(2 / lam)  # sin slot
        else:
            c[2 * j - 1] += amp * np.sqrt(2 / lam)  # cos slot
    return ProfileCoeffs(c, lam)


def _run_one(args):
    problem, master_seed, m, use_stub = args
    rng = sample_rng(master_seed, m)
    basis = problem.basis()
    try:
        sample = sample_surface(problem.deterministic, basis, rng)
        if use_stub:
            coeffs = ground_truth_reconstructor(sample, problem, rng)
        else:
            coeffs = reconstruct_sample(sample, problem, rng)
        dev = deviation_rms(coeffs, sample)
        return m, coeffs, dev, None
    except NumericalError as exc:
        return m, None, None, str(exc)


def mean_profile(samples) -> ProfileCoeffs:
    """Coefficient-wise arithmetic mean of equally sized profiles."""
    samples = list(samples)
    if not samples:
        raise ConfigError("mean of an empty profile list")
    lengths = {len(s.coeffs) for s in samples}
    if len(lengths) != 1:
        raise ConfigError("profiles must have equal coefficient lengths")
    stack = np.vstack([s.coeffs for s in samples])
    return ProfileCoeffs(stack.mean(axis=0), samples[0].period)


def std_profile(samples, mean: ProfileCoeffs, grid: np.ndarray) -> np.ndarray:
    """Pointwise ensemble standard deviation, population convention
    (divisor M)."""
    samples = list(samples)
    if len(samples) < 2:
        raise ConfigError("std_profile needs at least 2 samples")
    fm = np.vstack([evaluate_profile(s, grid) for s in samples])
    fbar = evaluate_profile(mean, grid)
    return np.sqrt(np.mean((fm - fbar) ** 2, axis=0))


def empirical_covariance(
    samples, mean: ProfileCoeffs, basis: KLBasis, grid: np.ndarray
) -> np.ndarray:
    """Sample covariance matrix of the basis projections, divisor M,
    symmetrized to remove rounding asymmetry."""
    samples = list(samples)
    fbar = evaluate_profile(mean, grid)
    v = np.vstack(
        [
            project_onto_basis(evaluate_profile(s, grid), fbar, basis)
            for s in samples
        ]
    )
    c = v.T @ v / len(samples)
    return (c + c.T) / 2.0


def symmetric_eigenvalues(c: np.ndarray) -> np.ndarray:
    """All eigenvalues of a small dense symmetric matrix, descending."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ConfigError("covariance matrix must be square")
    if not np.allclose(c, c.T, atol=1e-10 * max(1.0, np.abs(c).max())):
        raise ConfigError("covariance matrix must be symmetric")
    return np.sort(np.linalg.eigvalsh(c))[::-1]


def paired_eigenvalue_estimates(eigenvalues: np.ndarray, order: int) -> np.ndarray:
    """Collapse the 2J+1 spectrum to per-frequency estimates.

    The model's spectrum is lambda_0 once and lambda_j twice for j >= 1;
    sampling noise splits the pairs, so estimate lambda_j by averaging the
    (2j-1, 2j) slots of the descending spectrum.
    """
    ev = np.asarray(eigenvalues, dtype=float)
    est = [ev[0]]
    for j in range(1, order + 1):
        if 2 * j < len(ev):
            est.append(0.5 * (ev[2 * j - 1] + ev[2 * j]))
        elif 2 * j - 1 < len(ev):
            est.append(ev[2 * j - 1])
    return np.array(est)


def _recovery_lambda1(eigenvalues: np.ndarray) -> float:
    # average a near-degenerate (relative gap < 10%) pair below the top
    ev = np.asarray(eigenvalues, dtype=float)
    if len(ev) < 2:
        raise OrderViolationError("need at least two eigenvalues")
    if len(ev) >= 3 and abs(ev[1] - ev[2]) < 0.1 * max(ev[1], ev[2]):
        return 0.5 * (ev[1] + ev[2])
    return float(ev[1])


def recover_statistics(
    lambda0: float, lambda1: float, lambda_period: float = 2 * np.pi
):
    """Invert the closed-form eigenvalue pair for (corr_length, sigma).

    For the squared-exponential covariance the frequency-0 and frequency-1
    eigenvalues determine both parameters:

        l = (period/pi) * sqrt(ln(lambda0/lambda1))
        sigma = sqrt(lambda0 / (sqrt(pi) * l))

    which reduces to l = sqrt(4 ln(lambda0/lambda1)) at period 2*pi.
    """
    if not lambda0 > lambda1 > 0:
        raise OrderViolationError(
            f"recovery needs lambda0 > lambda1 > 0, got ({lambda0}, {lambda1})"
        )
    l_rec = lambda_period / np.pi * np.sqrt(np.log(lambda0 / lambda1))
    sigma_rec = np.sqrt(lambda0 / (SQRT_PI * l_rec))
    return float(l_rec), float(sigma_rec)


def recover_statistics_general(
    lambda_i: float,
    lambda_j: float,
    i: int,
    j: int,
    lambda_period: float = 2 * np.pi,
):
    """Recovery from any two distinct-frequency eigenvalues i < j."""
    if not 0 <= i < j:
        raise ConfigError("need frequency indices 0 <= i < j")
    if not lambda_i > lambda_j > 0:
        raise OrderViolationError(
            f"recovery needs lambda_{i} > lambda_{j} > 0"
        )
    w = 2 * np.pi / lambda_period
    l_rec = np.sqrt(4 * np.log(lambda_i / lambda_j) / (w**2 * (j**2 - i**2)))
    lam0 = lambda_i * np.exp((w * i * l_rec) ** 2 / 4)
    sigma_rec = np.sqrt(lam0 / (SQRT_PI * l_rec))
    return float(l_rec), float(sigma_rec)


@dataclass
class EnsembleResult:
    m_samples: int
    mean_coeffs: ProfileCoeffs
    grid: np.ndarray
    std_grid: np.ndarray
    covariance: np.ndarray
    eigenvalues: np.ndarray
    eigenvalue_estimates: np.ndarray
    l_rec: float
    sigma_rec: float
    failures: int
    deviations: np.ndarray = field(repr=False, default=None)
    sample_coeffs: list = field(repr=False, default=None)

    @property
    def mean_deviation(self) -> float:
        return float(np.mean(self.deviations))

    def to_json_dict(self) -> dict:
        return {
            "M": self.m_samples,
            "mean_coeffs": [float(v) for v in self.mean_coeffs.coeffs],
            "lambda_period": self.mean_coeffs.period,
            "grid": [float(v) for v in self.grid],
            "std_grid": [float(v) for v in self.std_grid],
            "covariance": [float(v) for v in self.covariance.ravel()],
            "covariance_dim": int(self.covariance.shape[0]),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "eigenvalue_estimates": [float(v) for v in self.eigenvalue_estimates],
            "sigma_rec": None if np.isnan(self.sigma_rec) else self.sigma_rec,
            "l_rec": None if np.isnan(self.l_rec) else self.l_rec,
            "failures": self.failures,
            "mean_deviation": self.mean_deviation,
            "deviations": [float(v) for v in self.deviations],
            "sample_coeffs": [
                [float(v) for v in c.coeffs] for c in self.sample_coeffs
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def run_ensemble(
    problem: EnsembleProblem,
    m_samples: int,
    master_seed: int,
    workers: int = 1,
    use_stub: bool = False,
    n_grid: int = 512,
) -> EnsembleResult:
    """Run the full Monte Carlo pipeline and aggregate statistics.

    Failed samples (Wood anomalies, divergence, positivity rejection) are
    dropped and counted; more than 5% failures aborts the ensemble. With
    use_stub=True the inversion is bypassed and each sample reports its
    exact coefficients, isolating the statistics pipeline.
    """
    if m_samples < 2:
        raise ConfigError("ensemble needs at least 2 samples")
    jobs = [(problem, master_seed, m, use_stub) for m in range(m_samples)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=4))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    coeffs, devs, failures = [], [], 0
    for _, c, dev, err in results:
        if err is not None:
            failures += 1
        else:
            coeffs.append(c)
            devs.append(dev)
    if failures > 0.05 * m_samples:
        raise NumericalError(
            f"{failures}/{m_samples} samples failed; ensemble aborted"
        )

    basis = problem.basis()
    lam = problem.deterministic.period
    grid = np.arange(n_grid) * lam / n_grid
    fbar = mean_profile(coeffs)
    s_f = std_profile(coeffs, fbar, grid)
    cov = empirical_covariance(coeffs, fbar, basis, grid)
    eigs = symmetric_eigenvalues(cov)
    est = paired_eigenvalue_estimates(eigs, basis.order)
    try:
        l_rec, sigma_rec = recover_statistics(
            float(eigs[0]), _recovery_lambda1(eigs), lam
        )
    except OrderViolationError:
        # degenerate spectrum (tiny M or sigma = 0): recovery undefined
        l_rec = sigma_rec = float("nan")
    return EnsembleResult(
        m_samples=m_samples,
        mean_coeffs=fbar,
        grid=grid,
        std_grid=s_f,
        covariance=cov,
        eigenvalues=eigs,
        eigenvalue_estimates=est,
        l_rec=l_rec,
        sigma_rec=sigma_rec,
        failures=failures,
        deviations=np.array(devs),
        sample_coeffs=coeffs,
    )
