"""Command-line front end.

Subcommands: sample, forward, invert, mccuq, plotdata. All outputs are JSON
or CSV files under --out; plotdata additionally renders a PNG figure next to
each CSV. Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError, GratingError, NumericalError
from .forward import Measurement, reflection_efficiencies, standoff_height
from .inverse import continuation_reconstruct, deviation_rms
from .surface import (
    KLBasis,
    ProfileCoeffs,
    SurfaceSample,
    kl_eigenvalue_closed_form,
    sample_surface,
)
from .uq import run_ensemble, sample_rng, synthesize_sample_measurements
from .wavefield import make_plane_wave
from . import plots


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=1), encoding="utf-8")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.mc.master_seed = args.seed
    return cfg


def _sample_to_dict(sample: SurfaceSample, spec, n_grid: int = 512) -> dict:
    xg = np.arange(n_grid) * sample.basis.lambda_period / n_grid
    return {
        "lambda_period": sample.basis.lambda_period,
        "sigma": spec.sigma,
        "corr_length": spec.corr_length,
        "kl_order": sample.basis.order,
        "kl_eigenvalues": [float(v) for v in sample.basis.eigenvalues],
        "deterministic_coeffs": [float(v) for v in sample.deterministic.coeffs],
        "draws": [float(v) for v in sample.draws],
        "grid": [float(v) for v in xg],
        "values": [float(v) for v in sample(xg)],
    }


def _sample_from_dict(d: dict) -> SurfaceSample:
    basis = KLBasis(
        order=d["kl_order"],
        eigenvalues=np.asarray(d["kl_eigenvalues"], float),
        lambda_period=d["lambda_period"],
    )
    det = ProfileCoeffs(np.asarray(d["deterministic_coeffs"], float), d["lambda_period"])
    return SurfaceSample(det, basis, np.asarray(d["draws"], float))


def cmd_sample(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = cfg.surface.covariance()
    problem = cfg.problem()
    basis = problem.basis()
    files = []
    for m in range(args.count):
        rng = sample_rng(cfg.mc.master_seed, m)
        sample = sample_surface(cfg.surface.profile(), basis, rng)
        name = f"sample_{m:04d}.json"
        _write_json(out / name, _sample_to_dict(sample, spec))
        files.append(name)
    _write_json(out / "manifest.json", {"count": args.count, "files": files})
    print(f"wrote {args.count} surface realization(s) to {out}")
    return 0


def cmd_forward(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(args.sample, "r", encoding="utf-8") as fh:
        sample = _sample_from_dict(json.load(fh))
    problem = cfg.problem()
    rng = sample_rng(cfg.mc.master_seed, 0)
    measurements, y0 = synthesize_sample_measurements(sample, problem, rng)
    lw = cfg.inversion.landweber()
    report = []
    n_files = 0
    for k in range(1, lw.k_max + 1):
        for li, theta in enumerate(lw.angles):
            m = measurements[(k, theta)]
            name = f"measurement_k{k}_l{li}.json"
            _write_json(out / name, m.to_json_dict())
            n_files += 1
            from .forward import solve_forward  # local to keep imports light

            rc = solve_forward(sample, make_plane_wave(float(k), theta),
                               problem.forward_order)
            eff = reflection_efficiencies(rc)
            report.append({
                "k": k,
                "theta": theta,
                "efficiencies": [float(v) for v in eff],
                "sum": float(eff.sum()),
                "residual_rms": rc.residual_rms,
                "energy_defect": rc.energy_defect,
            })
    _write_json(out / "efficiencies.json", {"y0": y0, "entries": report})
    print(f"wrote {n_files} measurement file(s) + efficiencies.json to {out}")
    return 0


def cmd_invert(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lw = cfg.inversion.landweber()
    mdir = Path(args.measurements)
    measurements = {}
    for path in sorted(mdir.glob("measurement_*.json")):
        with open(path, "r", encoding="utf-8") as fh:
            m = Measurement.from_json_dict(json.load(fh))
        measurements[(int(round(m.kappa)), m.theta)] = m
    missing = [
        (k, theta)
        for k in range(1, lw.k_max + 1)
        for theta in lw.angles
        if (k, theta) not in measurements
    ]
    if missing:
        raise ConfigError(
            f"missing measurement files for (k, theta) pairs: {missing}"
        )
    y0 = next(iter(measurements.values())).y0
    res = continuation_reconstruct(measurements, lw, y0,
                                   cfg.surface.lambda_period)
    dev = deviation_rms(res.coeffs, cfg.surface.profile())
    _write_json(out / "reconstruction.json",
                res.to_json_dict(sample_id=0, deviation_rms=dev))
    print(f"reconstruction written to {out / 'reconstruction.json'} "
          f"(deviation vs deterministic profile: {dev:.4e})")
    return 0


def cmd_mccuq(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_ensemble(
        cfg.problem(), cfg.mc.M, cfg.mc.master_seed, workers=args.workers
    )
    _write_json(out / "ensemble.json", result.to_json_dict())
    print(
        f"M={result.m_samples} failures={result.failures} "
        f"mean_dev={result.mean_deviation:.4e} "
        f"l_rec={result.l_rec:.4f} sigma_rec={result.sigma_rec:.4f}"
    )
    print(f"ensemble result written to {out / 'ensemble.json'}")
    return 0


def cmd_plotdata(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(args.result, "r", encoding="utf-8") as fh:
        data = json.load(fh)

    if args.kind == "eigenvalues":
        csv_path = out / "eigenvalues.csv"
        if "surface" in data:  # a config file: closed-form decay
            cfg = ExperimentConfig.from_json_dict(data)
            spec = cfg.surface.covariance()
            basis = cfg.problem().basis()
            rows = [
                (j, kl_eigenvalue_closed_form(j, spec))
                for j in range(basis.order + 1)
            ]
            _write_csv(csv_path, ["j", "lambda"], rows)
            plots.render_eigenvalues(
                [r[0] for r in rows], [r[1] for r in rows],
                out / "eigenvalues.png",
            )
        elif "eigenvalue_estimates" in data:  # an ensemble result
            est = data["eigenvalue_estimates"]
            rows = list(enumerate(est))
            _write_csv(csv_path, ["j", "lambda_rec"], rows)
            plots.render_eigenvalues(
                [r[0] for r in rows], [r[1] for r in rows],
                out / "eigenvalues.png",
            )
        else:
            raise ConfigError(
                f"{args.result} is neither a config nor an ensemble result"
            )
        print(f"wrote {csv_path} and eigenvalues.png")
        return 0

    if args.kind == "profile":
        if "mean_coeffs" in data:
            coeffs = ProfileCoeffs(np.asarray(data["mean_coeffs"], float),
                                   data.get("lambda_period", 2 * np.pi))
        elif "coeffs" in data:
            coeffs = ProfileCoeffs(np.asarray(data["coeffs"], float))
        else:
            raise ConfigError(f"{args.result} holds no profile coefficients")
        xg = np.arange(512) * coeffs.period / 512
        rows = list(zip(xg, coeffs(xg)))
        csv_path = out / "profile.csv"
        _write_csv(csv_path, ["x", "f"], rows)
        plots.render_profile(rows, out / "profile.png")
        print(f"wrote {csv_path} and profile.png")
        return 0

    raise ConfigError(f"unknown plotdata kind {args.kind!r}; "
                      "expected 'eigenvalues' or 'profile'")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON file")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--workers", type=int, default=1,
                        help="Monte Carlo worker processes")
    common.add_argument("--out", default=".", help="output directory")

    p = argparse.ArgumentParser(
        prog="gratinguq",
        description="Random periodic surface scattering: simulation and "
                    "statistical reconstruction.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("sample", parents=[common],
                        help="draw surface realizations")
    ps.add_argument("--count", type=int, default=1)
    ps.set_defaults(func=cmd_sample)

    pf = sub.add_parser("forward", parents=[common],
                        help="synthesize measurements for one sample")
    pf.add_argument("--sample", required=True, help="sample JSON file")
    pf.set_defaults(func=cmd_forward)

    pi = sub.add_parser("invert", parents=[common],
                        help="reconstruct a profile from measurements")
    pi.add_argument("--measurements", required=True,
                    help="directory of measurement JSON files")
    pi.set_defaults(func=cmd_invert)

    pm = sub.add_parser("mccuq", parents=[common],
                        help="full Monte Carlo ensemble reconstruction")
    pm.set_defaults(func=cmd_mccuq)

    pp = sub.add_parser("plotdata", parents=[common],
                        help="export CSV plot data and figures")
    pp.add_argument("--result", required=True, help="result or config JSON")
    pp.add_argument("--kind", required=True, help="eigenvalues | profile")
    pp.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except GratingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
