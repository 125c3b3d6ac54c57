"""Command-line interface.

Commands: check, solve, acceptabilities, robust, measures, experiment.
Exit status 0 on success, 2 when the assignment examples are incompatible,
1 on usage or input errors. Backend selection honors the SORTREP_BACKEND
environment variable ("highs" or "bruteforce").
"""

from __future__ import annotations

import argparse
import os
import pathlib
import sys

from . import experiment, io, mathprog, measures, procedures, robust, sampler
from .core import ConfigurationError, DomainError, InconsistencyError, assign
from .polytope import IncompatibilityError, build_compatible_set, check_compatibility
from .procedures import ProcedureId, SelectionContext, select_representative
from .sampler import DegenerateInteriorError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _backend():
    name = os.environ.get("SORTREP_BACKEND", "highs").lower()
    if name == "highs":
        return mathprog.HighsBackend()
    if name == "bruteforce":
        return mathprog.BruteForceBackend()
    raise UsageError(f"unknown backend {name!r} (use highs or bruteforce)")


def _out_dir(args) -> pathlib.Path:
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sortrep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, samples=False):
        p.add_argument("--data", required=True, help="dataset JSON file")
        p.add_argument("--epsilon", type=float, default=1e-6)
        if samples:
            p.add_argument("--samples", type=int, default=sampler.DEFAULT_SAMPLE_COUNT)
            p.add_argument("--seed", type=int, default=0)

    common(sub.add_parser("check", help="compatibility verdict"))

    p = sub.add_parser("solve", help="select a representative model")
    common(p, samples=True)
    p.add_argument(
        "--procedure", required=True,
        help="one of: " + ", ".join(pid.value for pid in ProcedureId),
    )
    p.add_argument("--mu", type=float, default=procedures.DEFAULT_MU)
    p.add_argument("--big-m", type=float, default=procedures.DEFAULT_BIG_M)
    p.add_argument("--out", default=".")

    p = sub.add_parser("acceptabilities", help="stochastic acceptability CSVs")
    common(p, samples=True)
    p.add_argument("--out", default=".")

    p = sub.add_parser("robust", help="necessary weak relation CSV")
    common(p, samples=True)
    p.add_argument("--out", default=".")

    p = sub.add_parser("measures", help="score a model against a reference")
    common(p, samples=True)
    p.add_argument("--model", required=True, help="model JSON under evaluation")
    p.add_argument("--against", required=True, help="reference model JSON")
    p.add_argument("--out", default=".")

    p = sub.add_parser("experiment", help="run a synthetic comparison suite")
    p.add_argument("--spec", required=True, help="run-spec JSON file")
    p.add_argument("--out", default=".")

    return parser


def _load(args):
    table, examples = io.load_dataset(args.data)
    cs = build_compatible_set(table, examples, epsilon=args.epsilon)
    return table, examples, cs


def _sampled(args, cs, table):
    sample = sampler.har_sample(cs, count=args.samples, seed=args.seed)
    acc = sampler.compute_acceptabilities(sample, table)
    return sample, acc


def _cmd_check(args) -> int:
    _, _, cs = _load(args)
    if check_compatibility(cs, _backend()):
        print("compatible")
        return 0
    print("incompatible")
    return 2


def _cmd_solve(args) -> int:
    table, _, cs = _load(args)
    try:
        pid = ProcedureId(args.procedure)
    except ValueError:
        raise UsageError(
            f"unknown procedure {args.procedure!r}; valid ids: "
            + ", ".join(p.value for p in ProcedureId)
        )
    backend = _backend()
    ctx = SelectionContext(cs=cs, mu=args.mu, big_m=args.big_m, backend=backend)
    if pid in (ProcedureId.CENTROID, ProcedureId.REPDIS, ProcedureId.CAI,
               ProcedureId.APOI, ProcedureId.COMB):
        ctx.sample, ctx.acceptabilities = _sampled(args, cs, table)
    if pid in (ProcedureId.ROBUST_ITER, ProcedureId.ROBUST_COMP):
        sample, _ = _sampled(args, cs, table)
        ctx.relations = robust.necessary_relations(cs, sample=sample, backend=backend)
    result = select_representative(pid, ctx)
    out = _out_dir(args)
    io.save_model(result.model, out / f"model_{pid.value}.json")
    assignments = {
        a.id: assign(result.model, a) for a in table.alternatives
    }
    io.export_assignments_csv(assignments, out / f"assignments_{pid.value}.csv")
    for line in result.warnings:
        print(f"warning: {line}", file=sys.stderr)
    print(f"wrote model_{pid.value}.json and assignments_{pid.value}.csv in {out}")
    return 0


def _cmd_acceptabilities(args) -> int:
    table, _, cs = _load(args)
    _, acc = _sampled(args, cs, table)
    out = _out_dir(args)
    sampler.export_cai_csv(acc, out / "cai.csv")
    sampler.export_pairwise_csv(acc.apwi, acc.alt_ids, out / "apwi.csv")
    sampler.export_pairwise_csv(acc.apei, acc.alt_ids, out / "apei.csv")
    print(f"wrote cai.csv, apwi.csv, apei.csv in {out}")
    return 0


def _cmd_robust(args) -> int:
    table, _, cs = _load(args)
    sample = sampler.har_sample(cs, count=args.samples, seed=args.seed)
    rel = robust.necessary_relations(cs, sample=sample, backend=_backend())
    out = _out_dir(args)
    rel.export_csv(out / "necessary.csv")
    print(f"wrote necessary.csv in {out}")
    return 0


def _cmd_measures(args) -> int:
    table, _, cs = _load(args)
    model = io.load_model(args.model)
    reference = io.load_model(args.against)
    sample, acc = _sampled(args, cs, table)
    cent = procedures.centroid(sample).model
    truth = {a.id: assign(reference, a) for a in table.alternatives}
    report = measures.measure_report(model, table, reference, cent, acc, truth)
    out = _out_dir(args)
    path = out / "measures.csv"
    with open(path, "w") as f:
        f.write(",".join(measures.MeasureReport.FIELDS) + "\n")
        f.write(",".join(f"{v:.6f}" for v in report.as_row()) + "\n")
    print(f"wrote measures.csv in {out}")
    return 0


def _cmd_experiment(args) -> int:
    specs, procs, sample_count = experiment.load_run_spec(args.spec)
    out = _out_dir(args)

    def progress(done, total):
        print(f"instance {done}/{total}", file=sys.stderr)

    result = experiment.run_suite(
        specs, procs, sample_count, backend=_backend(), progress=progress
    )
    result.export_csv(out / "results.csv")
    result.export_aggregates(out / "aggregates")
    print(f"wrote results.csv and aggregates/ in {out}")
    return 0


_COMMANDS = {
    "check": _cmd_check,
    "solve": _cmd_solve,
    "acceptabilities": _cmd_acceptabilities,
    "robust": _cmd_robust,
    "measures": _cmd_measures,
    "experiment": _cmd_experiment,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (IncompatibilityError, InconsistencyError, DegenerateInteriorError) as exc:
        print(f"incompatible preferences: {exc}", file=sys.stderr)
        return 2
    except (OSError, io.ParseError, ConfigurationError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
