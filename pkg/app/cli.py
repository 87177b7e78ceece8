from dotenv import load_dotenv
load_dotenv()

import argparse  # noqa: E402
import csv  # noqa: E402
import io  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import sys  # noqa: E402
from pathlib import Path  # noqa: E402
from typing import Any, Dict, List, Optional, Sequence  # noqa: E402

import numpy as np  # noqa: E402

from app.config import LAB_DATASET_DRAWS, LAB_GRID_K, LAB_SIGMA_DRAWS, LOG_LEVEL  # noqa: E402
from app.errors import CONFIG_ERROR, INVALID_ARGUMENT, IO_ERROR, LabError  # noqa: E402
from app.flows import lab  # noqa: E402
from app.flows.render import render_regions  # noqa: E402
from app.flows.scenarios import AnnulusConfig, RedundantConfig, build_scenario  # noqa: E402
from app.scenario_config import SCENARIOS  # noqa: E402
from app.tools.serm import GRID, PAIRS  # noqa: E402
from app.tools.theory import BoundParams  # noqa: E402
from app.tools.world import load_world, read_dataset, sample_dataset, save_world, serialize_world  # noqa: E402

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2


class UsageError(Exception):
    pass


class LabArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


# ---------- OUTPUT ----------
def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _csv_text(rows: List[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in _plain(r).items()})
    return buf.getvalue()


def emit(payload: Any, out: Optional[str], rows: Optional[List[Dict[str, Any]]] = None,
         default_format: str = "json") -> None:
    fmt = Path(out).suffix.lstrip(".").lower() if out else default_format
    if fmt == "csv":
        if rows is None:
            raise LabError(INVALID_ARGUMENT, "this command has no tabular output; use a .json path")
        text = _csv_text(rows)
    else:
        text = json.dumps(_plain(payload), sort_keys=True, indent=2) + "\n"
    if not out:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as e:
        raise LabError(IO_ERROR, f"cannot write {out}: {e}") from e
    logger.info("wrote %s", out)


# ---------- COMMANDS ----------
def _world(args):
    if not args.world:
        raise UsageError("--world is required")
    return load_world(args.world)


def _dataset(args, world):
    if getattr(args, "dataset", None):
        return read_dataset(args.dataset, world)
    if getattr(args, "n", None):
        return sample_dataset(world, args.n, args.seed)
    return None


def cmd_validate(args) -> int:
    try:
        text = Path(args.world).read_text()
    except OSError as e:
        raise LabError(IO_ERROR, f"cannot read world {args.world}: {e}") from e
    report = lab.validate_document(text)
    emit(report, args.out)
    return EXIT_OK if report["valid"] else EXIT_INVALID


def cmd_respond(args) -> int:
    emit(lab.respond(_world(args), args.mixture), args.out)
    return EXIT_OK


def cmd_sets(args) -> int:
    emit(lab.sets(_world(args), args.pair), args.out)
    return EXIT_OK


def cmd_risk(args) -> int:
    world = _world(args)
    emit(lab.risks(world, args.mixture, _dataset(args, world)), args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    emit(lab.decompose(_world(args), args.pair), args.out)
    return EXIT_OK


def _serm(args, randomised: bool) -> int:
    world = _world(args)
    dataset = _dataset(args, world)
    if dataset is None:
        raise UsageError("give --dataset or --n to sample one")
    emit(lab.run_serm(world, dataset, args.grid_k, randomised, args.mode), args.out)
    return EXIT_OK


def cmd_check_conditions(args) -> int:
    emit(lab.check_conditions(_world(args), args.grid_k), args.out)
    return EXIT_OK


def cmd_rademacher(args) -> int:
    world = _world(args)
    emit(lab.rademacher(world, args.n, args.mixture, args.sigma_draws, args.dataset_draws, args.seed,
                        args.exact, args.sup_grid_k), args.out)
    return EXIT_OK


def cmd_converge(args) -> int:
    world = _world(args)
    report = lab.converge(world, args.n_list, args.trials, args.delta, args.seed, args.grid_k,
                          args.deterministic, args.sigma_draws, args.dataset_draws)
    emit(report.to_dict(), args.out, report.csv_rows())
    return EXIT_OK


def cmd_bounds(args) -> int:
    params = BoundParams(n=args.n, delta=args.delta, d=args.d, B=args.B, X=args.X, u_star=args.u_star,
                         class_size=args.class_size, C=args.C)
    rows = lab.bounds(params)
    emit({r["bound"]: r["value"] for r in rows}, args.out, rows, default_format="csv")
    return EXIT_OK


SCENARIO_FIELDS = sorted(set(AnnulusConfig.model_fields) | set(RedundantConfig.model_fields))


def cmd_scenario(args) -> int:
    overrides = {f: getattr(args, f, None) for f in SCENARIO_FIELDS}
    world, F = build_scenario(args.name, overrides)
    if args.out:
        save_world(args.out, world)
        logger.info("scenario %s: %d points, %d hypotheses", args.name, world.n, len(F))
    else:
        emit(serialize_world(world), None)
    return EXIT_OK


def cmd_render(args) -> int:
    world = _world(args)
    if not args.out:
        raise UsageError("--out is required for render")
    roles = [r.strip() for r in (args.sets or "").split(",") if r.strip()]
    render_regions(world, lab.overlay_sets(world, roles, args.pair) if roles else [], args.out, args.title)
    return EXIT_OK


# ---------- PARSER ----------
def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = LabArgumentParser(add_help=False)
    common.add_argument("--world", help="world JSON document")
    common.add_argument("--out", help="output path; format follows the suffix (.json, .csv, .svg)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", help="JSON document whose keys override flags")

    parser = LabArgumentParser(prog="strategic-lab", description="Strategic classification lab")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=LabArgumentParser)

    def add(name, func, help_text, aliases=()):
        p = sub.add_parser(name, parents=[common], help=help_text, aliases=list(aliases))
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "validate a world document")

    p = add("respond", cmd_respond, "best response to a classifier or mixture")
    p.add_argument("--mixture", help='"f" or "f,g" (uniform) or "f:0.3,g:0.7"')

    for name, func, text in (("sets", cmd_sets, "gaming sets of a pair"),
                             ("decompose", cmd_decompose, "strategic risk decompositions")):
        p = add(name, func, text)
        p.add_argument("--pair", nargs="+", help="hypothesis names or indices")

    p = add("risk", cmd_risk, "clean / strategic / empirical risk")
    p.add_argument("--mixture")
    p.add_argument("--dataset", help="CSV with header point,label")
    p.add_argument("--n", type=int, help="sample a dataset of this size instead")

    for name, func in (("serm", lambda a: _serm(a, False)), ("serm-rand", lambda a: _serm(a, True))):
        p = add(name, func, "strategic ERM on a dataset")
        p.add_argument("--dataset")
        p.add_argument("--n", type=int)
        p.add_argument("--grid-k", type=int, default=LAB_GRID_K)
        p.add_argument("--mode", choices=[GRID, PAIRS], default=GRID)

    p = add("check-conditions", cmd_check_conditions, "sufficient conditions for a better uniform pair",
            aliases=("check-thm1",))
    p.add_argument("--grid-k", type=int, default=LAB_GRID_K)

    p = add("rademacher", cmd_rademacher, "Monte-Carlo Rademacher complexity")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mixture")
    p.add_argument("--sigma-draws", type=int, default=LAB_SIGMA_DRAWS)
    p.add_argument("--dataset-draws", type=int, default=LAB_DATASET_DRAWS)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--sup-grid-k", type=int, help="also report the sup over this grid's responses")

    p = add("converge", cmd_converge, "excess-risk convergence experiment")
    p.add_argument("--n-list", type=_int_list, default=[25, 50, 100, 200, 400, 800])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--grid-k", type=int, default=LAB_GRID_K)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--sigma-draws", type=int, default=LAB_SIGMA_DRAWS)
    p.add_argument("--dataset-draws", type=int, default=LAB_DATASET_DRAWS)

    p = add("bounds", cmd_bounds, "closed-form generalisation bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--X", type=float, default=1.0)
    p.add_argument("--u-star", type=float, default=0.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--class-size", type=int)

    p = add("scenario", cmd_scenario, "generate a scenario world")
    p.add_argument("name", choices=sorted(SCENARIOS))
    p.add_argument("--inner-radius", type=float)
    p.add_argument("--gap-radius", type=float)
    p.add_argument("--outer-radius", type=float)
    p.add_argument("--angular-bins", type=int)
    p.add_argument("--radial-bins", type=int)
    p.add_argument("--class-balance", type=float)
    p.add_argument("--curvature", type=float)
    p.add_argument("--offset", type=float)
    p.add_argument("--rotations", type=_float_list)
    p.add_argument("--cost-scale", type=_float_list, help="annulus: one value; redundant: one per block")
    p.add_argument("--block-values", type=_float_list)
    p.add_argument("--threshold", type=float)
    p.add_argument("--p-pos", type=_float_list)
    p.add_argument("--p-neg", type=_float_list)

    p = add("render", cmd_render, "SVG of the world with point sets overlaid")
    p.add_argument("--sets", help="comma-separated roles: G,G2,C,C2,E,E2,G_JOINT,N,H_HALF")
    p.add_argument("--pair", nargs="+")
    p.add_argument("--title")
    return parser


def _apply_config(args) -> None:
    if not args.config:
        return
    try:
        overrides = json.loads(Path(args.config).read_text())
    except OSError as e:
        raise LabError(IO_ERROR, f"cannot read config {args.config}: {e}") from e
    except json.JSONDecodeError as e:
        raise LabError(CONFIG_ERROR, f"{args.config}: invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(overrides, dict):
        raise LabError(CONFIG_ERROR, f"{args.config}: expected a JSON object")
    for key, value in overrides.items():
        setattr(args, key.replace("-", "_"), value)


def _normalise(args) -> None:
    # annulus takes a single cost scale, the redundant world one per block
    scale = getattr(args, "cost_scale", None)
    if isinstance(scale, list) and getattr(args, "name", None) in SCENARIOS:
        if SCENARIOS[args.name]["kind"] == "annulus":
            if len(scale) != 1:
                raise LabError(CONFIG_ERROR, "annulus cost_scale takes a single value")
            args.cost_scale = scale[0]


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(args)
        _normalise(args)
        return args.func(args)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    except LabError as e:
        sys.stderr.write(json.dumps(_plain(e.to_dict()), sort_keys=True) + "\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
