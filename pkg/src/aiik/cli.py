"""``ik-exp`` command line."""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments as ex
from .kinematics import ModelError, builtin_model, BUILTIN_MODELS
from .solver import Status
from .modelfile import ModelLoadError, dumps_model, resolve_model, verify_model
from .tangent import NotOrthonormal

log = logging.getLogger("aiik")


def _cmd_list(args) -> int:
    for s in ex.builtin_scenarios():
        labels = ", ".join(m.label for m in s.methods)
        print(f"{s.id:14s} {s.robot.name:9s} {s.description}")
        print(f"{'':14s} methods: {labels}")
    return 0


def _cmd_run(args) -> int:
    try:
        s = ex.get_scenario(args.scenario)
    except KeyError as exc:
        log.error("%s", exc.args[0])
        return 2
    s = ex.with_overrides(
        s,
        iterations=args.iters,
        max_iters=args.max_iters,
        lambda_sq=args.lambda_sq,
        epsilon=args.epsilon,
        seed=args.seed,
        seeds_count=args.seeds_count,
        error_mode=args.error_mode,
        prolonged_order=1 if args.prolonged_jacobian else None,
    )
    records = ex.run_scenario(s)
    paths = ex.emit_traces(records, args.out, [s.id])
    width = max(len(r.method) for r in records)
    for r in records:
        if r.seed is not None and not args.verbose:
            continue
        o = r.outcome
        tag = r.method if r.seed is None else f"{r.method}#{r.seed}"
        print(f"{tag:{width + 4}s} {o.status.value:16s} iters={o.iterations:5d} final_error={o.final_error:.3e}")
    for label in dict.fromkeys(r.method for r in records if r.seed is not None):
        runs = [r for r in records if r.method == label and r.seed is not None]
        conv = sum(r.outcome.status is Status.CONVERGED for r in runs)
        print(f"{label:{width + 4}s} {conv}/{len(runs)} converged")
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_verify(args) -> int:
    try:
        model = resolve_model(args.model_file)
    except (ModelLoadError, NotOrthonormal) as exc:
        log.error("%s", exc)
        return 2
    checks = verify_model(model)
    if not checks:
        print(f"{model.name}: no singular configurations catalogued")
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.singularity}: {c.name} ({c.detail})")
    return 0 if all(c.passed for c in checks) else 1


def _cmd_export(args) -> int:
    try:
        model = builtin_model(args.name)
    except ModelError as exc:
        log.error("%s", exc)
        return 2
    text = dumps_model(model)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ik-exp", description="IK experiments at kinematic singularities")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in scenarios").set_defaults(func=_cmd_list)

    r = sub.add_parser("run", help="run a scenario and write CSV traces")
    r.add_argument("scenario")
    r.add_argument("--iters", type=int, help="plotted iteration horizon (default 15)")
    r.add_argument("--max-iters", type=int, help="iteration budget per run (default 5000)")
    r.add_argument("--lambda-sq", type=float, help="damping lambda^2 for every DPI method")
    r.add_argument("--epsilon", type=float, help="perturbation magnitude (AI-IK seed and random range)")
    r.add_argument("--seed", type=int, help="SplitMix64 seed of the random sweep (default 12345)")
    r.add_argument("--seeds-count", type=int, help="number of random perturbations (default 20)")
    r.add_argument("--out", default="results", help="output directory")
    r.add_argument("--error-mode", choices=[m.value for m in ex.ErrorMode])
    r.add_argument("--prolonged-jacobian", action="store_true", help="first AI-IK step uses the order-1 series Jacobian")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("verify", help="verify the singular bases of a model file")
    v.add_argument("model_file", help="model file path or built-in name")
    v.set_defaults(func=_cmd_verify)

    e = sub.add_parser("export-model", help="print a built-in model in file format")
    e.add_argument("name", choices=sorted(BUILTIN_MODELS))
    e.add_argument("-o", "--output")
    e.set_defaults(func=_cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
