"""Command-line entry point.

Settings resolve as: built-in defaults < ``--config`` JSON file < ``CGQST_*``
environment variables < command-line flags.  Every output file carries the
resolved settings.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .linalg import RankDeficient
from .optimizer import CONSTRUCTIONS, METHODS, NoFeasiblePoint, OptimizerConfig, construction_layouts, optimize
from .povm import PovmSet, coefficient_csv, dump_povm, load_povm, validate
from .scaling import CoverageNeverAchieved, ScalingConfig, run_scaling, scaling_csv
from .tomography import conventional_povm_set, run_monte_carlo, study_csv

log = logging.getLogger("cgqst")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2
ENV_PREFIX = "CGQST_"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(float(part)))
    return out


# key -> (default, converter) per command; flags use the same names with dashes
DEFAULTS = {
    "optimize": {
        "qubits": (2, int),
        "construction": ("full-class2", str),
        "seed": (0, int),
        "restarts": (32, int),
        "max_iters": (2000, int),
        "threads": (1, int),
        "method": ("lbfgs", str),
        "layers": (1, int),
        "penalty": (10.0, float),
        "floor": (1e-3, float),
        "out": ("out", str),
    },
    "povm-export": {
        "qubits": (2, int),
        "construction": ("full-class2", str),
        "seed": (0, int),
        "layers": (1, int),
        "report": (None, str),
        "out": ("out", str),
    },
    "mc-study": {
        "povm": ([], list),
        "conventional": (False, bool),
        "shots": ([100, 1000, 10000, 100000], _int_list),
        "runs": (100, int),
        "seed": (0, int),
        "per_target": (False, bool),
        "out": ("out", str),
    },
    "scaling": {
        "qubits": ([2, 3, 4], _int_list),
        "samples": (64, int),
        "seed": (0, int),
        "max_budget": (None, int),
        "rank_max_qubits": (4, int),
        "depth_max_qubits": (6, int),
        "out": ("out", str),
    },
}


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def resolve(command: str, args: argparse.Namespace, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    table = DEFAULTS[command]
    cfg = {k: d for k, (d, _) in table.items()}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        for k, v in data.items():
            key = k.replace("-", "_")
            if key not in table:
                raise UsageError(f"unknown config key {k!r} for {command}")
            cfg[key] = v
    for key in table:
        env = environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            cfg[key] = env
    for key in table:
        v = getattr(args, key, None)
        if v is not None and v != [] and v is not False:
            cfg[key] = v
    out = {}
    for key, (default, conv) in table.items():
        v = cfg[key]
        if v is None:
            out[key] = None
        elif conv is bool:
            out[key] = _bool(v)
        elif conv is list:
            out[key] = [v] if isinstance(v, str) else list(v)
        else:
            try:
                out[key] = conv(v)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad value for {key}: {v!r}") from exc
    return out


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _csv_with_header(cfg: dict, body: str) -> str:
    return "# " + json.dumps(cfg, sort_keys=True) + "\n" + body


def _optimizer_config(cfg: dict) -> OptimizerConfig:
    try:
        return OptimizerConfig(
            n_qubits=cfg["qubits"],
            construction=cfg["construction"],
            seed=cfg["seed"],
            restarts=cfg["restarts"],
            max_iters=cfg["max_iters"],
            threads=cfg["threads"],
            method=cfg["method"],
            layers=cfg["layers"],
            rank_penalty_weight=cfg["penalty"],
            min_singular_floor=cfg["floor"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_optimize(cfg: dict) -> int:
    config = _optimizer_config(cfg)
    try:
        report = optimize(config)
    except NoFeasiblePoint as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    out = Path(cfg["out"])
    povm = report.povm_set(label=f"{config.construction}-seed{config.seed}")
    data = report.to_dict()
    data["cli"] = cfg
    _write(out / "optimize_report.json", json.dumps(data, indent=1, sort_keys=True))
    _write(out / "povm.json", dump_povm(povm, cfg))
    _write(out / "X.csv", _csv_with_header(cfg, coefficient_csv(povm)))
    print(f"entropy {report.best_entropy:.6f} rank {report.rank_at_best} "
          f"error {report.error_magnitude_at_best:.6g} -> {out}")
    return EXIT_OK


def cmd_povm_export(cfg: dict) -> int:
    out = Path(cfg["out"])
    if cfg["report"]:
        data = json.loads(Path(cfg["report"]).read_text())
        oc = OptimizerConfig(**{k: v for k, v in data["config"].items() if k in OptimizerConfig.__dataclass_fields__})
        layouts = construction_layouts(oc)
        povm = PovmSet.from_circuits(layouts, [np.array(p) for p in data["best_params"]],
                                     label=f"{oc.construction}-seed{oc.seed}")
    elif cfg["construction"] == "conventional":
        try:
            povm = conventional_povm_set(cfg["qubits"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        if cfg["construction"] not in CONSTRUCTIONS:
            raise UsageError(f"unknown construction {cfg['construction']!r}")
        oc = OptimizerConfig(n_qubits=cfg["qubits"], construction=cfg["construction"], layers=cfg["layers"])
        layouts = construction_layouts(oc)
        rng = np.random.default_rng([cfg["seed"], 0])
        flat = rng.uniform(0.0, 2 * np.pi, sum(lay.n_params for lay in layouts))
        splits = np.cumsum([lay.n_params for lay in layouts])[:-1]
        povm = PovmSet.from_circuits(layouts, np.split(flat, splits), label=f"{cfg['construction']}-random{cfg['seed']}")
    _write(out / "povm.json", dump_povm(povm, cfg))
    _write(out / "X.csv", _csv_with_header(cfg, coefficient_csv(povm)))
    summary = validate(povm)
    print(json.dumps({k: summary[k] for k in ("n_elements", "rank", "full_rank", "entropy")}, sort_keys=True))
    return EXIT_OK


def cmd_povm_validate(path: str) -> int:
    try:
        povm = load_povm(Path(path).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load POVM file {path}: {exc}") from exc
    summary = validate(povm)
    print(json.dumps(summary, sort_keys=True))
    if not summary["valid"] or summary["rank"] < summary["full_rank"]:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_mc_study(cfg: dict) -> int:
    sets = []
    for path in cfg["povm"]:
        try:
            povm = load_povm(Path(path).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load POVM file {path}: {exc}") from exc
        povm.label = povm.label or Path(path).stem
        sets.append(povm)
    if cfg["conventional"]:
        sets.append(conventional_povm_set())
    if not sets:
        raise UsageError("give at least one --povm file or --conventional")
    rows = []
    for povm in sets:
        try:
            study = run_monte_carlo(povm, shots_grid=cfg["shots"], runs=cfg["runs"], seed=cfg["seed"])
        except RankDeficient as exc:
            log.error("%s: %s", povm.label, exc)
            return EXIT_INFEASIBLE
        rows.extend(study.rows(per_target=cfg["per_target"]))
    out = Path(cfg["out"])
    _write(out / "mc_study.csv", _csv_with_header(cfg, study_csv(rows)))
    _write(out / "mc_study.json", json.dumps({"config": cfg, "rows": rows}, indent=1, sort_keys=True))
    print(f"{len(rows)} rows -> {out / 'mc_study.csv'}")
    return EXIT_OK


def cmd_scaling(cfg: dict) -> int:
    try:
        config = ScalingConfig(
            n_qubits=tuple(cfg["qubits"]),
            samples_per_check=cfg["samples"],
            seed=cfg["seed"],
            max_budget=cfg["max_budget"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        result = run_scaling(config, cfg["rank_max_qubits"], cfg["depth_max_qubits"])
    except CoverageNeverAchieved as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    out = Path(cfg["out"])
    _write(out / "scaling.csv", _csv_with_header(cfg, scaling_csv(result)))
    data = result.to_dict()
    data["cli"] = cfg
    _write(out / "scaling.json", json.dumps(data, indent=1, sort_keys=True))
    for rec in result.records:
        print(f"N={rec.n_qubits} layers={rec.min_layers} full_rank_at={rec.first_full_rank_budget} "
              f"depth={rec.min_depth}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cgqst", description="Coarse-grained POVM construction and tomography studies")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, threads=True):
        sp.add_argument("--config", help="JSON file with settings")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        if threads:
            sp.add_argument("--threads", type=int)

    sp = sub.add_parser("optimize", help="maximize Gram entropy of a CG-POVM set")
    common(sp)
    sp.add_argument("--qubits", type=int)
    sp.add_argument("--construction", choices=CONSTRUCTIONS)
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--max-iters", dest="max_iters", type=int)
    sp.add_argument("--method", choices=METHODS)
    sp.add_argument("--layers", type=int, help="brick-wall layers for --construction brick-wall")
    sp.add_argument("--penalty", type=float, help="rank penalty weight")
    sp.add_argument("--floor", type=float, help="singular-value floor relative to sigma_max")

    sp = sub.add_parser("povm-export", help="write a POVM set (random, conventional or from a report)")
    common(sp, threads=False)
    sp.add_argument("--qubits", type=int)
    sp.add_argument("--construction", choices=CONSTRUCTIONS + ("conventional",))
    sp.add_argument("--layers", type=int)
    sp.add_argument("--report", help="optimize_report.json to re-export")

    sp = sub.add_parser("povm-validate", help="check a POVM JSON file")
    sp.add_argument("path")

    sp = sub.add_parser("mc-study", help="Monte Carlo infidelity study")
    common(sp, threads=False)
    sp.add_argument("--povm", action="append", default=[], help="POVM JSON file (repeatable)")
    sp.add_argument("--conventional", action="store_true", default=None)
    sp.add_argument("--shots", type=_int_list, help="comma-separated shot budgets")
    sp.add_argument("--runs", type=int)
    sp.add_argument("--per-target", dest="per_target", action="store_true", default=None)

    sp = sub.add_parser("scaling", help="N-qubit layer/rank/depth sweep")
    common(sp, threads=False)
    sp.add_argument("--qubits", type=_int_list, help="e.g. 2-4 or 2,3,5")
    sp.add_argument("--samples", type=int, help="random draws per coverage check")
    sp.add_argument("--max-budget", dest="max_budget", type=int)
    sp.add_argument("--rank-max-qubits", dest="rank_max_qubits", type=int)
    sp.add_argument("--depth-max-qubits", dest="depth_max_qubits", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "povm-validate":
            return cmd_povm_validate(args.path)
        cfg = resolve(args.command, args)
        handler = {
            "optimize": cmd_optimize,
            "povm-export": cmd_povm_export,
            "mc-study": cmd_mc_study,
            "scaling": cmd_scaling,
        }[args.command]
        return handler(cfg)
    except UsageError as exc:
        print(f"cgqst: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
