"""Reproducible experiment driver.

Subcommands: ``gen`` (write an instance), ``sweep`` (beta sweep CSV),
``disenib`` (single-optimization maximum-compression report), ``curve``
(compression/prediction frontier CSV via a strictly convex surrogate) and
``check`` (exact bound/gap verification suite).

A run is a pure function of its :class:`RunConfig`: identical configs
produce byte-identical data files. Output files are written atomically
(temp file + rename) and numbers are serialized with 9 significant digits.
Timestamps appear only in the manifest, never in data files.

Exit codes: 0 success, 1 validation/parameter error, 2 verification-suite
failure, 3 numerical failure (e.g. a bisection bracket that does not
enclose its target). Errors are also printed as single-line JSON on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .disenib import optimize_disenib, analytic_minimum
from .errors import BracketError, IBLabError, ValidationError
from .instances import FAMILIES, InstanceSpec
from .lagrangian import Surrogate, sweep_beta
from .optim import OptimizerConfig
from .prob import JointXY
from .variational import run_bound_checks

LN2 = math.log(2.0)


def _fmt9(x: float) -> str:
    return format(float(x), ".9g")


def _round9(obj):
    """Round every float to 9 significant digits for stable serialization."""
    if isinstance(obj, float):
        return float(_fmt9(obj))
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _json_text(obj) -> str:
    return json.dumps(_round9(obj), indent=2, sort_keys=True) + "\n"


def _json_text_exact(obj) -> str:
    # Exchange formats (instances, encoders) must round-trip through the
    # 1e-12 simplex validation, so they keep full float precision.
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a same-directory temp file and rename, so the declared path
    never holds a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on, resolved and serializable."""

    subcommand: str
    instance: str
    surrogate: str = "identity"
    betas: tuple[float, ...] = ()
    card_t: int | None = None
    card_s: int | None = None
    optimizer: OptimizerConfig = OptimizerConfig()
    epsilon: float = 0.05
    out: str | None = None
    manifest: str | None = None
    fmt: str | None = None
    bits: bool = False
    encoders_out: str | None = None

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["betas"] = list(self.betas)
        return d


def parse_betas(text: str) -> tuple[float, ...]:
    """Either explicit ``b1,b2,...`` or a grid ``log:LO:HI:N`` / ``lin:LO:HI:N``."""
    head, sep, rest = text.partition(":")
    if sep and head in ("log", "lin"):
        try:
            lo_s, hi_s, n_s = rest.split(":")
            lo, hi, n = float(lo_s), float(hi_s), int(n_s)
        except ValueError as exc:
            raise ValidationError(f"bad beta grid {text!r}; expected {head}:LO:HI:N") from exc
        if n < 1:
            raise ValidationError("beta grid needs at least one point")
        if head == "log":
            if lo <= 0:
                raise ValidationError("log beta grid requires LO > 0")
            values = np.logspace(math.log10(lo), math.log10(hi), n)
        else:
            values = np.linspace(lo, hi, n)
        return tuple(float(v) for v in values)
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad beta list {text!r}") from exc
    return values


DEFAULT_BETAS = parse_betas("log:1e-3:1:20")


def resolve_instance(text: str) -> tuple[JointXY, dict]:
    """A spec string builds an instance; anything else is read as a JSON path.

    Returns the joint and a manifest record with a content hash: the hash of
    the file bytes for a path, or of the canonical instance JSON for a spec.
    """
    family = text.partition(":")[0]
    if family in FAMILIES:
        spec = InstanceSpec.parse(text)
        data = spec.build()
        payload = _json_text_exact(data.to_json()).encode()
        record = {
            "source": str(spec),
            "kind": "spec",
            "sha256": hashlib.sha256(payload).hexdigest(),
        }
        return data, record
    path = Path(text)
    if not path.is_file():
        raise ValidationError(
            f"instance {text!r} is neither a generator spec "
            f"(families: {', '.join(FAMILIES)}) nor a readable file"
        )
    raw = path.read_bytes()
    try:
        data = JointXY.from_json(json.loads(raw))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"instance file {text!r} is not valid JSON: {exc}") from exc
    record = {"source": str(path), "kind": "file", "sha256": hashlib.sha256(raw).hexdigest()}
    return data, record


def _write_manifest(config: RunConfig, instance_record: dict, outputs: list[str]) -> None:
    path = config.manifest
    if path is None and config.out is not None:
        path = config.out + ".manifest.json"
    if path is None:
        return
    manifest = {
        "schema": 1,
        "tool": "iblab",
        "version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "subcommand": config.subcommand,
        "master_seed": config.optimizer.seed,
        "config": config.to_json(),
        "instance": instance_record,
        "outputs": outputs,
    }
    atomic_write_text(path, _json_text(manifest))


def _nats_line(name: str, value: float, bits: bool) -> str:
    if bits:
        return f"{name} = {_fmt9(value)} nats ({_fmt9(value / LN2)} bits)"
    return f"{name} = {_fmt9(value)} nats"


def _points_rows(points) -> list[dict]:
    return [
        {
            "beta": p.beta,
            "i_xt_nats": p.i_xt,
            "i_ty_nats": p.i_ty,
            "objective": p.objective,
            "converged": p.converged,
            "restarts_used": p.restarts_used,
        }
        for p in points
    ]


def _sweep_csv(points) -> str:
    lines = ["beta,i_xt_nats,i_ty_nats,objective,converged,restarts_used"]
    for p in points:
        lines.append(
            f"{_fmt9(p.beta)},{_fmt9(p.i_xt)},{_fmt9(p.i_ty)},{_fmt9(p.objective)},"
            f"{'true' if p.converged else 'false'},{p.restarts_used}"
        )
    return "\n".join(lines) + "\n"


def _curve_csv(points) -> str:
    lines = ["i_xt_nats,i_ty_nats,beta"]
    for p in points:
        lines.append(f"{_fmt9(p.i_xt)},{_fmt9(p.i_ty)},{_fmt9(p.beta)}")
    return "\n".join(lines) + "\n"


def _run_gen(config: RunConfig, data: JointXY, record: dict) -> int:
    if record["kind"] != "spec":
        raise ValidationError("gen needs a generator spec, not an existing file")
    if config.out is None:
        raise ValidationError("gen requires --out")
    atomic_write_text(config.out, _json_text_exact(data.to_json()))
    print(_nats_line("H(X)", data.entropy_x(), config.bits))
    print(_nats_line("H(Y)", data.entropy_y(), config.bits))
    print(_nats_line("I(X;Y)", data.mutual_information(), config.bits))
    _write_manifest(config, record, [config.out])
    return 0


def _run_sweep(config: RunConfig, data: JointXY, record: dict) -> int:
    card_t = config.card_t if config.card_t is not None else data.n_x
    points = sweep_beta(data, config.betas, config.surrogate, card_t, config.optimizer)
    if config.fmt == "json":
        text = _json_text({"schema": 1, "points": _points_rows(points)})
    else:
        text = _sweep_csv(points)
    if config.out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(config.out, text)
        _write_manifest(config, record, [config.out])
    return 0


def _run_curve(config: RunConfig, data: JointXY, record: dict) -> int:
    if data.entropy_y() - data.mutual_information() < 1e-9:
        sys.stderr.write(
            json.dumps({
                "warning": "deterministic labels: identity-surrogate objectives only "
                           "visit corner points of the frontier; the convex surrogate "
                           "used here mitigates but end points may still cluster"
            }) + "\n"
        )
    card_t = config.card_t if config.card_t is not None else data.n_x
    points = sweep_beta(data, config.betas, config.surrogate, card_t, config.optimizer)
    points = sorted(points, key=lambda p: p.i_xt)
    if config.fmt == "json":
        rows = [
            {"i_xt_nats": p.i_xt, "i_ty_nats": p.i_ty, "beta": p.beta} for p in points
        ]
        text = _json_text({"schema": 1, "points": rows})
    else:
        text = _curve_csv(points)
    if config.out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(config.out, text)
        _write_manifest(config, record, [config.out])
    return 0


def _run_disenib(config: RunConfig, data: JointXY, record: dict) -> int:
    params, report = optimize_disenib(
        data, config.card_t, config.card_s, config.optimizer, epsilon=config.epsilon
    )
    doc = {
        "schema": 1,
        "h_y": report.h_y,
        "h_x": report.h_x,
        "i_xt": report.i_xt,
        "i_ty": report.i_ty,
        "i_xsy": report.i_xsy,
        "i_st": report.i_st,
        "objective": report.objective,
        "analytic_minimum": analytic_minimum(data),
        "gap": report.gap,
        "epsilon": report.epsilon,
        "consistent": report.consistent,
        "seed": config.optimizer.seed,
        "restarts": report.restarts_used,
        "converged": report.converged,
    }
    text = _json_text(doc)
    outputs = []
    if config.out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(config.out, text)
        outputs.append(config.out)
    if config.bits:
        for name in ("h_y", "i_xt", "i_ty"):
            print(_nats_line(name, doc[name], bits=True))
    if config.encoders_out is not None:
        enc_doc = {
            "encoder_t": params.realize_t().to_json(list(data.x_labels)),
            "encoder_s": params.realize_s().to_json(list(data.x_labels)),
        }
        atomic_write_text(config.encoders_out, _json_text_exact(enc_doc))
        outputs.append(config.encoders_out)
    if outputs:
        _write_manifest(config, record, outputs)
    return 0


def _run_check(config: RunConfig, data: JointXY, record: dict) -> int:
    checks = run_bound_checks(
        data, seed=config.optimizer.seed, card_t=config.card_t, card_s=config.card_s
    )
    passed = all(c.passed for c in checks)
    doc = {
        "schema": 1,
        "passed": passed,
        "checks": [
            {"name": c.name, "passed": c.passed, "worst_violation": c.worst,
             "tolerance": c.tolerance}
            for c in checks
        ],
    }
    if config.fmt == "json":
        sys.stdout.write(_json_text(doc))
    else:
        width = max(len(c.name) for c in checks)
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status}  {c.name:<{width}}  worst violation {c.worst:.3e}")
        print(f"{'PASS' if passed else 'FAIL'}  overall")
    if config.out is not None:
        atomic_write_text(config.out, _json_text(doc))
        _write_manifest(config, record, [config.out])
    return 0 if passed else 2


_RUNNERS = {
    "gen": _run_gen,
    "sweep": _run_sweep,
    "curve": _run_curve,
    "disenib": _run_disenib,
    "check": _run_check,
}


def run(config: RunConfig) -> int:
    """Execute one run; returns the process exit code."""
    try:
        Surrogate.parse(config.surrogate)  # validate early
        data, record = resolve_instance(config.instance)
        return _RUNNERS[config.subcommand](config, data, record)
    except BracketError as exc:
        _print_error(exc)
        return 3
    except IBLabError as exc:
        _print_error(exc)
        return 1


def _print_error(exc: Exception) -> None:
    sys.stderr.write(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
    )


def _add_common(p: argparse.ArgumentParser, *, betas: bool, cards: bool) -> None:
    p.add_argument("--instance", required=True,
                   help="generator spec 'family:n=..,k=..[,noise=..][,seed=..]' or a JSON file path")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--restarts", type=int, default=None, help="descent restarts")
    p.add_argument("--step-size", type=float, default=None, help="gradient step")
    p.add_argument("--max-iters", type=int, default=None, help="iteration budget")
    p.add_argument("--grad-tol", type=float, default=None, help="gradient stop tolerance")
    p.add_argument("--init-scale", type=float, default=None, help="logit init std")
    p.add_argument("--out", default=None, help="output data file")
    p.add_argument("--manifest", default=None,
                   help="manifest path (default: <out>.manifest.json when --out is set)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    p.add_argument("--bits", action="store_true",
                   help="also print headline quantities in bits (display only)")
    if betas:
        p.add_argument("--betas", default=None,
                       help="'b1,b2,...' or grid 'log:LO:HI:N' / 'lin:LO:HI:N' "
                            "(default log:1e-3:1:20)")
        p.add_argument("--surrogate", default=None,
                       help="identity | square | power:u | exp:s")
    if cards:
        p.add_argument("--card-t", type=int, default=None, help="bottleneck cardinality")
        p.add_argument("--card-s", type=int, default=None, help="nuisance cardinality")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iblab",
        description="Exact discrete information-bottleneck laboratory",
    )
    parser.add_argument("--version", action="version", version=f"iblab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", help="generate an instance and write its JSON")
    _add_common(p, betas=False, cards=False)

    p = sub.add_parser("sweep", help="optimize the trade-off objective over a beta grid")
    _add_common(p, betas=True, cards=True)

    p = sub.add_parser("curve", help="trace the compression/prediction frontier "
                                     "(square surrogate by default)")
    _add_common(p, betas=True, cards=True)

    p = sub.add_parser("disenib", help="single-optimization maximum-compression run")
    _add_common(p, betas=False, cards=True)
    p.add_argument("--epsilon", type=float, default=0.05,
                   help="consistency threshold in nats (default 0.05)")
    p.add_argument("--encoders-out", default=None,
                   help="also write the learned encoder matrices as JSON")

    p = sub.add_parser("check", help="run the exact bound/gap verification suite")
    _add_common(p, betas=False, cards=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    if args.restarts is not None:
        overrides["restarts"] = args.restarts
    elif args.subcommand == "disenib":
        overrides["restarts"] = 20
    for name, key in (("step_size", "step_size"), ("max_iters", "max_iters"),
                      ("grad_tol", "grad_tolerance"), ("init_scale", "init_scale")):
        value = getattr(args, name, None)
        if value is not None:
            overrides[key] = value
    optimizer = OptimizerConfig(seed=args.seed, **overrides)

    betas: tuple[float, ...] = ()
    surrogate = "identity"
    if args.subcommand in ("sweep", "curve"):
        betas = parse_betas(args.betas) if args.betas else DEFAULT_BETAS
        if args.surrogate is not None:
            surrogate = args.surrogate
        elif args.subcommand == "curve":
            # identity cannot trace the frontier on deterministic labels;
            # the squared compression term can.
            surrogate = "square"
    return RunConfig(
        subcommand=args.subcommand,
        instance=args.instance,
        surrogate=surrogate,
        betas=betas,
        card_t=getattr(args, "card_t", None),
        card_s=getattr(args, "card_s", None),
        optimizer=optimizer,
        epsilon=getattr(args, "epsilon", 0.05),
        out=args.out,
        manifest=args.manifest,
        fmt=args.fmt,
        bits=args.bits,
        encoders_out=getattr(args, "encoders_out", None),
    )


def main(argv=None) -> int:
    # The console-script wrapper passes the return value to sys.exit.
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except IBLabError as exc:
        _print_error(exc)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
