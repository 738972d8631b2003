"""Command-line batch runner.

Exit codes: 0 pass, 1 margin violation, 2 input error or failed hypothesis.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import catalog
from .linalg import DomainError, InputError, SpectrumWindow, MAX_DIM
from .means import check_connection_axioms, connection_from_json
from .sharpness import SPACES, ratio_search

EXIT_PASS, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2
CSV_COLUMNS = ("case_id", "seed", "dim", "n_nodes", "a", "b", "margin", "pass")


def _clean(obj):
    """Replace non-finite floats by ``None`` so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the target directory and rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".oplab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path} at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    return cfg


def report_exit_code(report) -> int:
    if not report.hypotheses_ok:
        return EXIT_ERROR
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def _check_dim(dim):
    if dim is not None and not 1 <= dim <= MAX_DIM:
        raise InputError(f"--dim must be in [1, {MAX_DIM}]")


def cmd_verify(args) -> int:
    _check_dim(args.dim)
    if args.config is None and args.seed is None:
        raise InputError("verify needs --config or --seed")
    if args.config is not None:
        report = catalog.run_case(args.case_id, load_config(args.config))
        report.seed = args.seed
    else:
        report = catalog.run_seeded(args.case_id, args.seed, args.dim)
    emit(dumps(report.to_json()), args.out)
    for flag in report.failed_flags():
        print(f"hypothesis {flag.name}: {flag.detail}", file=sys.stderr)
    return report_exit_code(report)


@dataclass
class TrialRow:
    case_id: str
    seed: int
    dim: int
    n_nodes: int
    a: float
    b: float
    margin: float
    passed: bool
    hypotheses_ok: bool
    error: str = ""

    @property
    def failed(self) -> bool:
        return not (self.passed and self.hypotheses_ok) or bool(self.error)


def run_trial(case_id: str, seed: int, dim: int | None) -> TrialRow:
    cfg = catalog.random_config(case_id, seed, dim)
    shape = catalog.config_summary(cfg)
    try:
        report = catalog.run_case(case_id, cfg)
    except (InputError, DomainError) as exc:
        return TrialRow(case_id, seed, shape["dim"], shape["n_nodes"], shape["a"], shape["b"],
                        math.nan, False, False, str(exc))
    return TrialRow(case_id, seed, shape["dim"], shape["n_nodes"], shape["a"], shape["b"],
                    report.margin, report.passed, report.hypotheses_ok)


def _run_chunk(tasks):
    return [run_trial(*t) for t in tasks]


def run_suite(case_ids, seed: int, trials: int, dim: int | None, jobs: int = 1) -> list[TrialRow]:
    """Trial ``i`` of every case uses seed ``seed + i``; rows come back in task order."""
    if trials < 1:
        raise InputError("--trials must be at least 1")
    _check_dim(dim)
    for cid in case_ids:
        catalog.get_case(cid)
    tasks = [(cid, seed + i, dim) for cid in case_ids for i in range(trials)]
    if jobs <= 1:
        return _run_chunk(tasks)
    size = max(1, len(tasks) // (4 * jobs))
    chunks = [tasks[k:k + size] for k in range(0, len(tasks), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return [row for part in pool.map(_run_chunk, chunks) for row in part]


def aggregate(rows: list[TrialRow]) -> dict:
    cases: dict[str, dict] = {}
    for r in rows:
        c = cases.setdefault(r.case_id, {"trials": 0, "min_margin": math.inf,
                                         "worst_seed": r.seed, "failures": 0,
                                         "failing_seeds": []})
        c["trials"] += 1
        if r.margin < c["min_margin"]:
            c["min_margin"], c["worst_seed"] = r.margin, r.seed
        if r.failed:
            c["failures"] += 1
            c["failing_seeds"].append(r.seed)
    return cases


def rows_to_csv(rows: list[TrialRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.case_id, r.seed, r.dim, r.n_nodes, repr(r.a), repr(r.b),
                    repr(r.margin), str(r.passed and r.hypotheses_ok and not r.error).lower()])
    return buf.getvalue()


def cmd_suite(args) -> int:
    case_ids = [args.case.upper()] if args.case else list(catalog.CATALOG)
    rows = run_suite(case_ids, args.seed, args.trials, args.dim, args.jobs)
    if args.format == "csv":
        emit(rows_to_csv(rows), args.out)
    else:
        cases = aggregate(rows)
        emit(dumps({"seed": args.seed, "trials": args.trials, "dim": args.dim,
                    "cases": cases,
                    "pass": all(c["failures"] == 0 for c in cases.values())}), args.out)
    if any(r.error or not r.hypotheses_ok for r in rows):
        return EXIT_ERROR
    return EXIT_VIOLATION if any(r.failed for r in rows) else EXIT_PASS


def parse_window(text: str) -> SpectrumWindow:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"--window expects 'a,b', got {text!r}") from exc
    return SpectrumWindow(a, b)


def cmd_sharpness(args) -> int:
    result = ratio_search(args.case_id, parse_window(args.window), args.dim, args.nodes,
                          args.budget, args.seed, space=args.space, restarts=args.restarts)
    emit(dumps(result.to_json()), args.out)
    return EXIT_PASS


def parse_connection(text: str):
    """``geometric``, ``power:0.25`` or an inline JSON object."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return connection_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed connection JSON at column {exc.colno}: {exc.msg}") from exc
    kind, _, alpha = text.partition(":")
    obj = {"kind": kind}
    if alpha:
        try:
            obj["alpha"] = float(alpha)
        except ValueError as exc:
            raise InputError(f"bad power exponent {alpha!r}") from exc
    return connection_from_json(obj)


def cmd_axioms(args) -> int:
    _check_dim(args.dim)
    report = check_connection_axioms(parse_connection(args.connection), args.seed,
                                     args.trials, args.dim)
    emit(dumps(report.to_json()), args.out)
    return EXIT_PASS if report.holds() else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oplab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run one checker on a JSON config or a seeded instance")
    v.add_argument("case_id")
    v.add_argument("--config")
    v.add_argument("--seed", type=int)
    v.add_argument("--dim", type=int)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("suite", help="seeded randomized trials over the catalog")
    s.add_argument("--case")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--dim", type=int)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(func=cmd_suite)

    h = sub.add_parser("sharpness", help="search for the largest LHS/RHS ratio")
    h.add_argument("case_id")
    h.add_argument("--window", required=True)
    h.add_argument("--budget", type=int, default=5000)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--dim", type=int, default=2)
    h.add_argument("--nodes", type=int, default=2)
    h.add_argument("--space", choices=SPACES)
    h.add_argument("--restarts", type=int, default=8)
    h.add_argument("--out")
    h.set_defaults(func=cmd_sharpness)

    x = sub.add_parser("axioms", help="property run of the connection axioms")
    x.add_argument("--connection", required=True)
    x.add_argument("--trials", type=int, default=100)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--dim", type=int, default=3)
    x.add_argument("--out")
    x.set_defaults(func=cmd_axioms)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
