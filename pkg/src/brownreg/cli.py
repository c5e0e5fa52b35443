"""Command-line interface.

Exit codes: 0 success, 2 configuration or usage error, 3 numeric failure,
4 input/output error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .brown import GridSpec, brown_density, log_potential_field
from .ensembles import read_matrix, realize, sample_ginibre
from .exceptions import BrownRegError, ConfigError, IngestionError, NumericFailure
from .fkdet import fk_determinant, mc_fk_gaussian, trace_log_abs
from .flow import coupled_compare, simulate_flow
from .linalg import eigenvalues, singular_values
from .pipeline import (
    ExperimentConfig,
    _cell_streams,
    _dumps,
    emit_report,
    emit_sweep,
    load_config,
    run_regularization,
    schedule_t,
    sweep_t,
    write_eigenvalue_csv,
)
from .seeding import SeedSpec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--seed", type=_u64, help="root seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--trials", type=int, help="number of independent trials")
    p.add_argument("--n", type=int, help="matrix size")
    p.add_argument("--t", type=float, help="regularization size (fixed schedule)")
    return p


def _ensemble_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="ensemble model (ginibre, gue, elliptic, nilpotent_shift, file)")
    p.add_argument("--tau", type=float, help="elliptic parameter")
    p.add_argument("--matrix", type=Path, help="matrix file (implies --model file)")


def _grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--center", type=complex, default=0j, help="grid center, e.g. 0.5+0j")
    p.add_argument("--half-width", type=float, default=1.6)
    p.add_argument("--nodes", type=int, default=101, help="nodes per side (odd)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="brownreg", description="Gaussian regularization of non-normal spectra.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample-spectrum", parents=[common],
                       help="eigenvalues (or singular values) of A + sqrt(t) G")
    _ensemble_args(p)
    p.add_argument("--kind", choices=("eigenvalues", "singular_values"), default="eigenvalues")

    p = sub.add_parser("fk-det", parents=[common],
                       help="Monte Carlo tr ln|G| for Gaussian G, or the FK determinant of a matrix file")
    p.add_argument("--matrix", type=Path)
    p.add_argument("--jobs", type=int, default=1)

    for name, text in (("field", "log-potential field on a grid"),
                       ("density", "Brown density from the discrete Laplacian")):
        p = sub.add_parser(name, parents=[common], help=text)
        _ensemble_args(p)
        _grid_args(p)

    p = sub.add_parser("sv-flow", parents=[common], help="simulate the singular-value flow")
    p.add_argument("--initial", type=_floats, required=True, help="initial singular values, e.g. 2,1")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--no-noise", action="store_true", help="solve the noise-free ODE")

    p = sub.add_parser("compare-flow", parents=[common], help="coupled comparison of two flows")
    p.add_argument("--s1", type=_floats, required=True)
    p.add_argument("--s2", type=_floats, required=True)
    p.add_argument("--dt", type=float, default=1e-3)

    p = sub.add_parser("run", parents=[common], help="run a configured regularization experiment")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("sweep-t", parents=[common], help="distance to the target across t")
    p.add_argument("--t-list", type=_floats, required=True)
    p.add_argument("--method", choices=("energy", "radial_ks"), default="energy")
    return parser


# --------------------------------------------------------------------------- helpers


def _settings(args) -> dict:
    """Flat configuration: file values overridden by command-line flags."""
    flat: dict = dict(load_config(args.config)) if args.config else {}
    if args.seed is not None:
        flat.pop("seed", None)
        flat["root_seed"] = args.seed
    if args.trials is not None:
        flat["trials"] = args.trials
    if args.n is not None:
        flat["n_list"] = [args.n]
        flat["ensemble.n"] = args.n
    if args.t is not None:
        for k in ("schedule.t0", "schedule.alpha", "schedule.table"):
            flat.pop(k, None)
        flat["schedule.kind"] = "fixed"
        flat["schedule.t"] = args.t
    model = getattr(args, "model", None)
    if getattr(args, "matrix", None) is not None:
        model = "file"
        flat["ensemble.path"] = str(args.matrix)
    if model is not None:
        flat["ensemble.model"] = model
    if getattr(args, "tau", None) is not None:
        flat["ensemble.tau"] = args.tau
    return flat


def _matrix_config(args, default_model: str, default_t: float) -> ExperimentConfig:
    flat = _settings(args)
    flat.setdefault("ensemble.model", default_model)
    if flat["ensemble.model"] == "file" and "ensemble.n" not in flat:
        flat["ensemble.n"] = read_matrix(flat["ensemble.path"]).shape[0]
        flat["n_list"] = [flat["ensemble.n"]]
    flat.setdefault("ensemble.n", 100)
    if "schedule.kind" not in flat:
        flat["schedule.kind"] = "fixed"
        flat["schedule.t"] = default_t
    return ExperimentConfig.from_flat(flat)


def _out_dir(args) -> Path:
    out = args.out or Path(".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IngestionError(f"cannot create output directory: {exc.strerror or exc}", path=str(out)) from exc
    return out


def _regularized(config: ExperimentConfig, n: int, trial: int):
    a_seed, g_seed = _cell_streams(SeedSpec(config.root_seed), n, trial)
    a = realize(config.ensemble_at(n), a_seed)
    t = schedule_t(config.schedule, n)
    if t == 0:
        return a, t
    return a + math.sqrt(t) * sample_ginibre(n, g_seed), t


def _print(obj) -> None:
    sys.stdout.write(_dumps(obj))


# --------------------------------------------------------------------------- commands


def cmd_sample_spectrum(args) -> int:
    config = _matrix_config(args, "ginibre", 0.0)
    n = config.n_list[-1]
    out = _out_dir(args)
    spectra = []
    for k in range(config.trials):
        x, t = _regularized(config, n, k)
        s = eigenvalues(x) if args.kind == "eigenvalues" else singular_values(x)
        spectra.append((k, s.values))
    name = "spectrum.csv"
    write_eigenvalue_csv(out / name, spectra)
    _print({"n": n, "t": t, "trials": config.trials, "kind": args.kind, "file": str(out / name)})
    return EXIT_OK


def cmd_fk_det(args) -> int:
    if args.matrix is not None:
        a = read_matrix(args.matrix)
        tl = trace_log_abs(a)
        _print({"n": a.shape[0], "fk_det": fk_determinant(a), "log_fk": tl.value, "clamped": tl.clamped})
        return EXIT_OK
    flat = _settings(args)
    n = int(flat.get("ensemble.n", 200))
    trials = int(flat.get("trials", 20))
    est = mc_fk_gaussian(n, trials, SeedSpec(int(flat.get("root_seed", 0))), n_jobs=args.jobs)
    if args.out is not None:
        path = _out_dir(args) / "fk_det.json"
        try:
            path.write_text(_dumps(est.to_dict()), encoding="utf-8")
        except OSError as exc:
            raise IngestionError(f"cannot write result: {exc.strerror or exc}", path=str(path)) from exc
    _print(est.to_dict())
    return EXIT_OK


def _field(args):
    config = _matrix_config(args, "nilpotent_shift", 1e-2)
    n = config.n_list[-1]
    x, t = _regularized(config, n, 0)
    grid = GridSpec(args.center, args.half_width, args.nodes)
    return log_potential_field(x, grid), n, t


def cmd_field(args) -> int:
    fld, n, t = _field(args)
    path = _out_dir(args) / "field.csv"
    fld.to_csv(path)
    _print({"n": n, "t": t, "nodes": fld.grid.nodes_per_side, "clamped_nodes": int(fld.clamped_mask.sum()),
            "file": str(path)})
    return EXIT_OK


def cmd_density(args) -> int:
    fld, n, t = _field(args)
    dens = brown_density(fld)
    path = _out_dir(args) / "density.csv"
    dens.to_csv(path)
    mass = float(dens.spacing**2 * dens.density.sum())
    _print({"n": n, "t": t, "mass_in_grid": mass, "file": str(path)})
    return EXIT_OK


def cmd_sv_flow(args) -> int:
    flat = _settings(args)
    t_final = float(flat.get("schedule.t", 1.0)) if args.t is None else args.t
    seed = SeedSpec(int(flat.get("root_seed", 0)))
    traj = simulate_flow(args.initial, t_final, args.dt, seed, noise=not args.no_noise)
    path = _out_dir(args) / "trajectory.csv"
    traj.to_csv(path)
    _print({"t_final": t_final, "steps": len(traj.dt_history), "rejections": traj.rejections,
            "jittered": traj.jittered, "final": traj.final.values.tolist(), "file": str(path)})
    return EXIT_OK


def cmd_compare_flow(args) -> int:
    flat = _settings(args)
    t_final = float(flat.get("schedule.t", 0.5)) if args.t is None else args.t
    seed = SeedSpec(int(flat.get("root_seed", 0)))
    res = coupled_compare(args.s1, args.s2, t_final, args.dt, seed)
    out = _out_dir(args)
    res.trajectories[0].to_csv(out / "trajectory_1.csv")
    res.trajectories[1].to_csv(out / "trajectory_2.csv")
    try:
        (out / "verdict.json").write_text(res.verdict_json() + "\n", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot write verdict: {exc.strerror or exc}", path=str(out)) from exc
    _print(res.verdict())
    return EXIT_OK


def cmd_run(args) -> int:
    flat = _settings(args)
    if "ensemble.model" not in flat:
        raise ConfigError("run needs ensemble.model (use --config)")
    config = ExperimentConfig.from_flat(flat)
    report = run_regularization(config, n_jobs=args.jobs)
    path = emit_report(report, _out_dir(args))
    _print({"report": str(path), "summary": report.summary})
    return EXIT_OK


def cmd_sweep_t(args) -> int:
    flat = _settings(args)
    flat.setdefault("ensemble.model", "nilpotent_shift")
    flat.setdefault("ensemble.n", 100)
    flat.setdefault("target.model", "haar_unitary")
    flat.pop("schedule.kind", None)
    flat.pop("schedule.t", None)
    config = ExperimentConfig.from_flat(flat)
    result = sweep_t(config.ensemble, config.n_list[-1], args.t_list, config.trials,
                     config.target, SeedSpec(config.root_seed), method=args.method)
    path = emit_sweep(result, _out_dir(args))
    _print({"sweep": str(path), "rows": [r.to_dict() for r in result.rows]})
    return EXIT_OK


COMMANDS = {
    "sample-spectrum": cmd_sample_spectrum,
    "fk-det": cmd_fk_det,
    "field": cmd_field,
    "density": cmd_density,
    "sv-flow": cmd_sv_flow,
    "compare-flow": cmd_compare_flow,
    "run": cmd_run,
    "sweep-t": cmd_sweep_t,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args)
    except IngestionError as exc:
        print(f"brownreg: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"brownreg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, np.linalg.LinAlgError) as exc:
        print(f"brownreg: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrownRegError as exc:  # pragma: no cover - every subclass is handled above
        print(f"brownreg: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"brownreg: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
