"""Command line interface.

    superteach gen        --task margin1d --n 16 --seed 7 --out s.csv
    superteach teach      --task gauss1d --teacher bk --k 1 --in s.csv
    superteach experiment --task logistic --teacher search --strategy exhaustive \\
                          --n-list 16 --d 2 --trials 10 --out results.csv --medians medians.csv
    superteach rates      --in results.csv
    superteach tail       --n 2 --eps 0.5 --trials 1000000

Exit codes: 0 success, 1 usage or input error, 2 runtime failure.
Machine output goes to stdout (or ``--out``); summaries go to stderr.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import sys
from typing import List, Optional

import numpy as np

from . import formats
from .core import Interval, Task, TaskSpec, TrainingSet
from .datagen import sample_task
from .harness import (
    ExperimentConfig,
    TeacherSpec,
    fit_rate,
    run_trials,
    summarize,
    tail_check,
    teach,
)
from .learners import ConvergenceError
from .teachers import Exhaustive, FixedK, GreedyForward, LocalSwap

TASKS = [t.value for t in Task]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_task_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--d", type=int, default=None, help="dimension (logistic/ridge; default 2)")
    p.add_argument("--theta-star", type=_floats, default=None,
                   help="target; comma-separated for vectors (default per task)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--noise-var", type=float, default=0.1)
    p.add_argument("--target", type=_floats, default=None, help="consistent task: interval a,b")
    p.add_argument("--domain", type=_floats, default=None, help="consistent task: grid lo,hi")
    p.add_argument("--mode", choices=["least", "greatest"], default="least")


def _add_teacher_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--teacher", choices=["identity", "bk", "bms", "search"], required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--strategy", choices=["exhaustive", "fixedk", "greedy", "local"], default="exhaustive")
    p.add_argument("--cap", type=int, default=22, help="largest n for exhaustive search")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--search-seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10 ** 7, help="max subsets for the k-subset teacher")


def build_task(args, d: Optional[int] = None) -> TaskSpec:
    task = Task(args.task)
    theta = args.theta_star
    if task in (Task.HALFSPACE, Task.LINREG):
        d = d or args.d or (len(theta) if theta else 2)
        ctor = TaskSpec.halfspace if task is Task.HALFSPACE else TaskSpec.linreg
        kwargs = {"lam": args.lam}
        if task is Task.LINREG:
            kwargs["noise_var"] = args.noise_var
        return ctor(d, None if theta is None else np.array(theta), **kwargs)
    if d not in (None, 1) or (getattr(args, "d", None) or 1) != 1:
        raise UsageError(f"task {task.value} is one-dimensional")
    if task is Task.GAUSS_1D:
        return TaskSpec.gauss1d(theta[0] if theta else 0.0)
    if task is Task.MARGIN_1D:
        if theta and theta[0] != 0.0:
            raise UsageError("margin1d has its threshold at 0")
        return TaskSpec.margin1d()
    if task is Task.INTERVAL_MLE:
        return TaskSpec.interval_mle(theta[0] if theta else 1.0)
    if not args.target or len(args.target) != 2:
        raise UsageError("the consistent task needs --target a,b")
    domain = tuple(args.domain) if args.domain else (0.0, 20.0)
    return TaskSpec.consistent_interval(Interval(*args.target), domain, args.mode)


def build_teacher(args) -> TeacherSpec:
    strategy = None
    if args.teacher == "search":
        if args.strategy == "exhaustive":
            strategy = Exhaustive(args.cap)
        elif args.strategy == "fixedk":
            if args.k is None:
                raise UsageError("--strategy fixedk needs --k")
            strategy = FixedK(args.k)
        elif args.strategy == "greedy":
            strategy = GreedyForward()
        else:
            strategy = LocalSwap(args.max_iters, args.restarts, args.search_seed)
    if args.teacher == "bk" and args.k is None:
        raise UsageError("--teacher bk needs --k")
    return TeacherSpec(args.teacher, args.k, strategy)


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _check_schema(task: TaskSpec, S: TrainingSet) -> None:
    t = task.task
    if t in (Task.GAUSS_1D, Task.INTERVAL_MLE):
        if S.labeled:
            raise formats.SchemaError(f"{t.value} data must not carry a y column")
    elif not S.labeled:
        raise formats.SchemaError(f"{t.value} data needs a y column")
    if t in (Task.MARGIN_1D, Task.HALFSPACE, Task.CONSISTENT_INTERVAL):
        S.check_binary_labels()
    if S.n == 0:
        raise formats.SchemaError("data file has no rows")


def cmd_gen(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    task = build_task(args)
    S = sample_task(task, args.n, args.seed)
    with _output(args.out) as fh:
        formats.write_data_csv(S, fh)
    print(f"wrote {S.n} rows ({task.task.value}, d={S.d}, seed={args.seed})", file=sys.stderr)
    return 0


def cmd_teach(args) -> int:
    with open(args.input, newline="") as fh:
        S = formats.read_data_csv(fh)
    task = build_task(args, d=S.d if Task(args.task) in (Task.HALFSPACE, Task.LINREG) else None)
    if S.d != task.d:
        raise formats.SchemaError(f"data has d={S.d} but the task expects d={task.d}")
    _check_schema(task, S)
    teacher = build_teacher(args)
    result = teach(task, teacher, S, args.budget)
    with _output(args.out) as fh:
        json.dump(formats.teaching_json(result), fh)
        fh.write("\n")
    if args.emit_plot:
        with open(f"{args.emit_plot}_points.csv", "w", newline="") as points, \
                open(f"{args.emit_plot}_lines.csv", "w", newline="") as lines:
            formats.write_plot_csvs(S, result, task.theta_star, points, lines)
    ratio = "n/a" if result.ratio is None else f"{result.ratio:.3g}"
    print(f"selected {result.mask.size}/{S.n} items, risk {result.risk_subset:.3g} vs "
          f"{result.risk_full:.3g} (ratio {ratio})", file=sys.stderr)
    return 0


def cmd_experiment(args) -> int:
    teacher = build_teacher(args)
    if args.d_list:
        n_list = args.n_list or ([args.n] if args.n else None)
        if not n_list or len(n_list) != 1:
            raise UsageError("a --d-list sweep needs exactly one sample size (--n or --n-list)")
        configs = [ExperimentConfig(build_task(args, d=d), teacher, tuple(n_list), args.trials, args.seed)
                   for d in args.d_list]
        by = "d"
    else:
        if not args.n_list:
            raise UsageError("give --n-list (or --d-list with --n)")
        configs = [ExperimentConfig(build_task(args), teacher, tuple(args.n_list), args.trials, args.seed)]
        by = "n"
    records = []
    for config in configs:
        records.extend(run_trials(config, jobs=args.jobs))
    with _output(args.out) as fh:
        formats.write_results_csv(records, fh, timing=not args.no_timing)
    summaries = summarize(records, by=by)
    if args.no_timing:
        summaries = [dataclasses.replace(s, median_wall_time=0.0) for s in summaries]
    if args.medians:
        with _output(args.medians) as fh:
            formats.write_medians_csv(summaries, fh)
    for s in summaries:
        ratio = "n/a" if s.median_ratio is None else f"{s.median_ratio:.3g}"
        frac = "n/a" if s.median_subset_fraction is None else f"{s.median_subset_fraction:.2f}"
        print(f"{by}={s.key}: median ratio {ratio}, |B(S)|/n {frac}, {s.failures} failed", file=sys.stderr)
    return 0


def cmd_rates(args) -> int:
    with open(args.input, newline="") as fh:
        records = formats.read_results_csv(fh, required=["n", "risk_full", "risk_subset"])
    records = [r for r in records if not r.error]
    summaries = summarize(records)
    if len(summaries) < 3:
        raise UsageError("rate fitting needs at least 3 distinct n")
    out = {}
    for which, attr in (("risk_full", "median_risk_full"), ("risk_subset", "median_risk_subset")):
        fit = fit_rate([(s.key, getattr(s, attr)) for s in summaries])
        out[which] = {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared}
    with _output(args.out) as fh:
        json.dump(out, fh)
        fh.write("\n")
    print(f"slopes: full {out['risk_full']['slope']:.4g}, subset {out['risk_subset']['slope']:.4g}",
          file=sys.stderr)
    return 0


def cmd_tail(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    if not 0 < args.eps <= 1:
        raise UsageError("--eps must lie in (0, 1]")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    res = tail_check(args.n, args.eps, args.trials, args.seed)
    json.dump(res, sys.stdout)
    sys.stdout.write("\n")
    print(f"exact {res['exact']:.6g}, MC {res['estimate']:.6g} +- {res['stderr']:.2g}: "
          f"{'pass' if res['pass'] else 'FAIL'}", file=sys.stderr)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="superteach", description="Super-teaching experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="sample a training set to CSV")
    _add_task_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("teach", help="run a teacher on a data CSV, print subset JSON")
    _add_task_args(p)
    _add_teacher_args(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--emit-plot", metavar="PREFIX", default=None,
                   help="also write PREFIX_points.csv and PREFIX_lines.csv")
    p.set_defaults(func=cmd_teach)

    p = sub.add_parser("experiment", help="Monte Carlo sweep over n or d")
    _add_task_args(p)
    _add_teacher_args(p)
    p.add_argument("--n-list", type=_ints, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d-list", type=_ints, default=None)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    p.add_argument("--medians", default=None)
    p.add_argument("--no-timing", action="store_true", help="write zero wall times (byte-stable output)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("rates", help="fit log-log slopes of median risks vs n")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("tail", help="exact vs Monte Carlo tail of the large-margin risk")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_tail)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    # LinAlgError subclasses ValueError, so runtime failures are caught first
    except (ConvergenceError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"superteach {args.command}: runtime failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, OSError) as exc:  # ValueError covers schema and budget errors
        print(f"superteach {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
