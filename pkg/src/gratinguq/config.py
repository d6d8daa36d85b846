"""Experiment configuration: JSON schema, defaults, and profile presets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .inverse import DEFAULT_ANGLES, LandweberConfig
from .surface import CovarianceSpec, ProfileCoeffs
from .uq import EnsembleProblem


def _example2_coeffs(max_freq: int = 18) -> list:
    """Fourier coefficients of 1.2 + 0.05 e^{cos 2x} + 0.04 e^{cos 3x},
    truncated at max_freq (the omitted tail is below 1e-6)."""
    n = 4096
    x = np.arange(n) * 2 * np.pi / n
    f = 1.2 + 0.05 * np.exp(np.cos(2 * x)) + 0.04 * np.exp(np.cos(3 * x))
    spec = np.fft.rfft(f) / n
    c = [float(spec[0].real)]
    for p in range(1, max_freq + 1):
        c.append(float(2 * spec[p].real))   # cos(px)
        c.append(float(-2 * spec[p].imag))  # sin(px)
    return c


PRESETS = {
    "example1": [1.5, 0.2, 0.0, 0.2, 0.0],
    "example2": _example2_coeffs(),
}


@dataclass
class SurfaceConfig:
    preset: str | None = "example1"
    coeffs: list | None = None
    sigma: float = 1 / 15
    l: float = 1.0
    lambda_period: float = 2 * np.pi

    def profile(self) -> ProfileCoeffs:
        if self.coeffs is not None:
            return ProfileCoeffs(np.asarray(self.coeffs, float), self.lambda_period)
        if self.preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)} "
                "or give explicit coeffs"
            )
        return ProfileCoeffs(np.asarray(PRESETS[self.preset]), self.lambda_period)

    def covariance(self) -> CovarianceSpec:
        return CovarianceSpec(self.sigma, self.l, self.lambda_period)


@dataclass
class InversionConfig:
    k_max: int = 2
    angles: list = field(default_factory=lambda: list(DEFAULT_ANGLES))
    N: int = 8
    gamma: float = 1e-6
    eta0: float = 0.001
    T: int = 500
    quad_points: int = 256

    def landweber(self) -> LandweberConfig:
        return LandweberConfig(
            k_max=self.k_max,
            angles=tuple(self.angles),
            order=self.N,
            eta0=self.eta0,
            iterations=self.T,
            quad_points=self.quad_points,
            gamma=self.gamma,
        )


@dataclass
class DataConfig:
    y0_standoff: float = 0.1
    Q: int = 128
    tau: float = 0.001
    N_forward: int = 48


@dataclass
class McConfig:
    M: int = 100
    master_seed: int = 110


@dataclass
class ExperimentConfig:
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    inversion: InversionConfig = field(default_factory=InversionConfig)
    data: DataConfig = field(default_factory=DataConfig)
    mc: McConfig = field(default_factory=McConfig)

    def problem(self) -> EnsembleProblem:
        return EnsembleProblem(
            spec=self.surface.covariance(),
            deterministic=self.surface.profile(),
            landweber=self.inversion.landweber(),
            tau=self.data.tau,
            n_measure=self.data.Q,
            forward_order=self.data.N_forward,
            standoff=self.data.y0_standoff,
        )

    def to_json_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            return cls(
                surface=SurfaceConfig(**d.get("surface", {})),
                inversion=InversionConfig(**d.get("inversion", {})),
                data=DataConfig(**d.get("data", {})),
                mc=McConfig(**d.get("mc", {})),
            )
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc

    @classmethod
    def from_json(cls, s: str) -> "ExperimentConfig":
        try:
            return cls.from_json_dict(json.loads(s))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())
