"""Command-line front end.

Exit codes: 0 ok, 1 invalid arguments or parameters, 2 verification or solver
failure, 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from typing import Optional

from .construction import (
    ConnectingPoints,
    ParamError,
    TubeParams,
    build_spine,
    default_params,
    param_problems,
    sqrt_scaled_params,
    sample_instance_u,
    validate_params,
)
from .experiments import (
    OrderedSearchInstance,
    bound_curves,
    estimate_hit_probability,
    mid_slice_witnesses,
    posterior_progress_trace,
    reduce_tarski_to_ordered_search,
)
from .herringbone import (
    HerringboneInstance,
    ScanBudgetError,
    Spine,
    SpineError,
    evaluate,
    spine_violations,
    verify_map,
)
from .lattice import GridShape, ShapeError, hamming_weight
from .oracle import CountingOracle, format_coords
from .rng import SeededRng
from .solvers import SOLVERS, BudgetError, SolverFailure

EXIT_OK, EXIT_ARGS, EXIT_FAIL, EXIT_IO = 0, 1, 2, 3

FORMAT_TAG = "tarski-herringbone-v1"
BENCH_HEADER = ["n", "k", "L", "rho", "seed", "solver", "queries", "iterations", "success", "answer_wt", "wall_ms"]
HITPROB_HEADER = ["w_coords", "hits", "samples", "frequency", "bound"]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ----------------------------------------------------------- instance files

_TOP_KEYS = {"format", "n", "k", "j", "spine", "tube", "seed"}
_TUBE_KEYS = {"L", "rho", "connecting_points", "strict"}


@dataclass
class InstanceFile:
    """On-disk instance: either an explicit spine or tube parameters plus
    connecting points.  Both forms describe the same instance."""

    n: int
    k: int
    j: int
    spine: Optional[list] = None
    params: Optional[TubeParams] = None
    connecting_points: Optional[dict] = None
    seed: Optional[int] = None

    @property
    def shape(self) -> GridShape:
        return GridShape(self.n, self.k)

    def to_dict(self) -> dict:
        d: dict = {"format": FORMAT_TAG, "n": self.n, "k": self.k, "j": self.j}
        if self.params is not None:
            d["tube"] = {
                "L": self.params.L,
                "rho": self.params.rho,
                "strict": self.params.strict,
                "connecting_points": {str(a): list(p) for a, p in sorted(self.connecting_points.items())},
            }
        else:
            d["spine"] = [list(v) for v in self.spine]
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d) -> "InstanceFile":
        """Schema check only; spine and parameter invariants are checked later."""
        if not isinstance(d, dict):
            raise ValueError("instance file must be a JSON object")
        extra = set(d) - _TOP_KEYS
        if extra:
            raise ValueError(f"unknown fields {sorted(extra)}")
        if d.get("format") != FORMAT_TAG:
            raise ValueError(f"format tag must be {FORMAT_TAG!r}, got {d.get('format')!r}")
        for key in ("n", "k", "j"):
            if not isinstance(d.get(key), int) or isinstance(d.get(key), bool):
                raise ValueError(f"field {key!r} must be an integer")
        if ("spine" in d) == ("tube" in d):
            raise ValueError("exactly one of 'spine' or 'tube' must be present")
        seed = d.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            raise ValueError("field 'seed' must be an integer")
        out = cls(d["n"], d["k"], d["j"], seed=seed)
        if "spine" in d:
            sp = d["spine"]
            if not isinstance(sp, list) or not all(
                isinstance(v, list) and all(isinstance(x, int) for x in v) for v in sp
            ):
                raise ValueError("'spine' must be a list of integer coordinate lists")
            out.spine = [tuple(v) for v in sp]
            return out
        tube = d["tube"]
        if not isinstance(tube, dict):
            raise ValueError("'tube' must be an object")
        if set(tube) != _TUBE_KEYS:
            raise ValueError(f"'tube' must have exactly the fields {sorted(_TUBE_KEYS)}")
        if not isinstance(tube["strict"], bool):
            raise ValueError("'tube.strict' must be a boolean")
        for key in ("L", "rho"):
            if not isinstance(tube[key], int) or isinstance(tube[key], bool):
                raise ValueError(f"'tube.{key}' must be an integer")
        cps = tube["connecting_points"]
        if not isinstance(cps, dict):
            raise ValueError("'tube.connecting_points' must be an object keyed by weight")
        points = {}
        for key, p in cps.items():
            if not key.isdigit() or not isinstance(p, list) or not all(isinstance(x, int) for x in p):
                raise ValueError(f"bad connecting point entry {key!r}: {p!r}")
            points[int(key)] = tuple(p)
        out.connecting_points = points
        out.params = _RawParams(tube["L"], tube["rho"], tube["strict"])
        return out

    @classmethod
    def loads(cls, text: str) -> "InstanceFile":
        return cls.from_dict(json.loads(text))

    def build(self, check: bool = True) -> HerringboneInstance:
        """Construct the instance; raises ParamError, SpineError or ShapeError."""
        shape = self.shape
        if self.spine is not None:
            spine = Spine(shape, self.spine, check=check)
        else:
            p = self.params
            params = validate_params(shape, p.L, p.rho, p.strict) if isinstance(p, _RawParams) else p
            spine = build_spine(ConnectingPoints(self.connecting_points), params)
        return HerringboneInstance(shape, spine, self.j)

    def tube_params(self) -> Optional[TubeParams]:
        if self.params is None:
            return None
        p = self.params
        return validate_params(self.shape, p.L, p.rho, p.strict) if isinstance(p, _RawParams) else p


@dataclass(frozen=True)
class _RawParams:
    L: int
    rho: int
    strict: bool


def read_instance_file(path: str) -> InstanceFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot read {path}: {e}")
    try:
        return InstanceFile.loads(text)
    except (ValueError, json.JSONDecodeError) as e:
        raise CliError(EXIT_IO, f"cannot parse {path}: {e}")


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot write {path}: {e}")


def _table(rows: list[dict], header: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _str_list(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


# --------------------------------------------------------------- parameters


def resolve_params(n: int, k: int, L: Optional[int], rho: Optional[int], strict: bool) -> TubeParams:
    """Explicit ``--L/--rho`` are validated as given; otherwise pick defaults.

    With ``--strict`` and no explicit values, the square-root scaled parameters are used
    when ``n`` allows them, else the smallest strict ``rho`` for ``L = 1``.
    """
    try:
        shape = GridShape(n, k)
    except (ShapeError, ValueError) as e:
        raise CliError(EXIT_ARGS, str(e))
    try:
        if L is not None or rho is not None:
            if L is None or rho is None:
                raise CliError(EXIT_ARGS, "--L and --rho must be given together")
            return validate_params(shape, L, rho, strict)
        if not strict:
            return default_params(n, k)
        try:
            return sqrt_scaled_params(n, k)
        except ParamError:
            pass
        for r in range(k, shape.max_weight + 1, k):
            if not param_problems(shape, 1, r, True):
                return TubeParams(shape, 1, r, True)
        raise ParamError([f"no strict parameters with L=1 exist for n={n}, k={k}"])
    except ParamError as e:
        raise CliError(EXIT_ARGS, f"invalid parameters: {e}")


# ----------------------------------------------------------------- commands


def generate_instance_file(params: TubeParams, seed: int, j: Optional[int] = None) -> InstanceFile:
    inst = sample_instance_u(params, SeededRng(seed))
    shape = params.shape
    # recover the connecting points: the spine vertex at each slice weight
    cps = {a: inst.spine[a] for a in params.index_set}
    jj = inst.j if j is None else j
    if not 0 <= jj <= shape.max_weight:
        raise CliError(EXIT_ARGS, f"--j must lie in [0, {shape.max_weight}]")
    return InstanceFile(shape.n, shape.k, jj, params=params, connecting_points=cps, seed=seed)


def cmd_gen(args) -> int:
    if args.spine is not None:
        try:
            verts = [tuple(int(x) for x in p.split("/")) for p in args.spine.split(",")]
        except ValueError:
            raise CliError(EXIT_ARGS, "--spine expects comma-separated points like 0/0,0/1,1/1")
        if args.j is None:
            raise CliError(EXIT_ARGS, "--j is required with --spine")
        k = len(verts[0])
        n = max(max(v) for v in verts) + 1
        f = InstanceFile(n, k, args.j, spine=verts, seed=None)
        try:
            f.build()
        except (SpineError, ShapeError, ValueError) as e:
            raise CliError(EXIT_ARGS, f"invalid spine: {e}")
    else:
        if args.n is None or args.k is None:
            raise CliError(EXIT_ARGS, "--n and --k are required unless --spine is given")
        params = resolve_params(args.n, args.k, args.L, args.rho, args.strict)
        f = generate_instance_file(params, args.seed, args.j)
    _write_text(args.out, f.dumps())
    if args.reveal:
        print(f"fixed point weight: {f.j}", file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_verify(args) -> int:
    f = read_instance_file(args.path)
    shape = None
    try:
        shape = f.shape
        if f.spine is not None:
            violations = spine_violations(shape, f.spine)
            for v in violations:
                print(f"FAIL {v}")
            inst = f.build(check=False) if not violations or all(
                e.invariant not in ("in grid", "length k(n-1)+1") for e in violations) else None
        else:
            violations = []
            inst = f.build()
    except (ParamError, SpineError, ShapeError, ValueError) as e:
        print(f"FAIL {e}")
        return EXIT_FAIL
    if inst is None:
        return EXIT_FAIL
    try:
        rep = verify_map(
            shape,
            lambda v: evaluate(inst, v),
            expected_fixed_point=inst.fixed_point if inst.spine.valid else None,
            off_spine=lambda v: v not in inst.spine.index,
        )
    except ScanBudgetError as e:
        print(f"PARTIAL {e}; only spine invariants were checked")
        return EXIT_FAIL if violations else EXIT_OK
    except (IndexError, ValueError) as e:
        print(f"FAIL evaluation error: {e}")
        return EXIT_FAIL
    for msg in rep.failures():
        print(f"FAIL {msg}")
    ok = rep.ok and not violations
    if ok:
        print(f"OK {rep.scanned} vertices: monotone, unique fixed point {rep.fixed_points[0]}")
    return EXIT_OK if ok else EXIT_FAIL


def _run_solver(name: str, inst: HerringboneInstance):
    oracle = CountingOracle(inst)
    t0 = time.perf_counter()
    rep = SOLVERS[name](oracle)
    wall = (time.perf_counter() - t0) * 1000
    success = rep.success and rep.answer == inst.fixed_point
    row = {
        "solver": name,
        "queries": oracle.count,
        "iterations": rep.iterations,
        "success": "true" if success else "false",
        "answer_wt": hamming_weight(rep.answer) if rep.answer is not None else "",
        "wall_ms": f"{wall:.3f}",
    }
    return row, oracle, rep


def _check_solver(name: str) -> None:
    if name not in SOLVERS:
        raise CliError(EXIT_ARGS, f"unknown solver {name!r}; choose from {sorted(SOLVERS)}")


def cmd_solve(args) -> int:
    _check_solver(args.solver)
    f = read_instance_file(args.path)
    try:
        inst = f.build()
        params = f.tube_params()
    except (ParamError, SpineError, ShapeError, ValueError) as e:
        print(f"invalid instance: {e}", file=sys.stderr)
        return EXIT_FAIL
    try:
        row, oracle, rep = _run_solver(args.solver, inst)
    except BudgetError as e:
        raise CliError(EXIT_ARGS, str(e))
    except SolverFailure as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_FAIL
    answer = rep.answer
    full = {
        "n": f.n, "k": f.k,
        "L": params.L if params else "", "rho": params.rho if params else "",
        "seed": f.seed if f.seed is not None else "",
        **row,
    }
    if args.format == "json":
        print(json.dumps({**full, "answer": list(answer) if answer else None}))
    else:
        print(f"answer {format_coords(answer) if answer else '-'}")
        print(f"queries {row['queries']}")
        print(f"iterations {row['iterations']}")
    if args.transcript:
        _write_text(args.transcript, "".join(line + "\n" for line in oracle.transcript.to_lines()))
    if args.out:
        _append_rows(args.out, [full])
    return EXIT_OK if row["success"] == "true" else EXIT_FAIL


def _append_rows(path: str, rows: list[dict]) -> None:
    import os

    try:
        new = not os.path.exists(path) or os.path.getsize(path) == 0
        with open(path, "a", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=BENCH_HEADER, lineterminator="\n")
            if new:
                w.writeheader()
            w.writerows(rows)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot write {path}: {e}")


def bench_rows(ns, ks, solvers, trials, seed, L=None, rho=None, strict=False, clock=True) -> list[dict]:
    rows = []
    for n in ns:
        for k in ks:
            params = resolve_params(n, k, L, rho, strict)
            for t in range(trials):
                s = seed + t
                inst = sample_instance_u(params, SeededRng(s))
                for name in solvers:
                    try:
                        row, _, _ = _run_solver(name, inst)
                    except BudgetError as e:
                        raise CliError(EXIT_ARGS, str(e))
                    if not clock:
                        row["wall_ms"] = ""
                    rows.append({"n": n, "k": k, "L": params.L, "rho": params.rho, "seed": s, **row})
    return rows


def cmd_bench(args) -> int:
    for name in args.solver:
        _check_solver(name)
    if args.trials < 1 or not args.n or not args.k:
        raise CliError(EXIT_ARGS, "need at least one n, one k and --trials >= 1")
    try:
        rows = bench_rows(args.n, args.k, args.solver, args.trials, args.seed, args.L, args.rho, args.strict)
    except SolverFailure as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_FAIL
    _write_text(args.out, _table(rows, BENCH_HEADER, args.format))
    if args.curves:
        cells = sorted({(r["n"], r["k"], r["L"], r["rho"]) for r in rows})
        crows = []
        for n, k, L, rho in cells:
            c = bound_curves(n, k, L, rho) if k >= 2 else {"lower": "", "upper": "", "d_lower_bound": ""}
            crows.append({"n": n, "k": k, "L": L, "rho": rho, **c})
        _write_text(args.curves, _table(crows, ["n", "k", "L", "rho", "lower", "upper", "d_lower_bound"], args.format))
    return EXIT_OK if all(r["success"] == "true" for r in rows) else EXIT_FAIL


def cmd_hitprob(args) -> int:
    shape = GridShape(args.n, args.k)
    rho = args.rho if args.rho is not None else shape.max_weight
    try:
        params = validate_params(shape, args.L, rho, args.strict)
        witnesses = mid_slice_witnesses(args.a, args.b, params, args.witnesses)
        rep = estimate_hit_probability(args.a, args.b, params, witnesses, args.samples, SeededRng(args.seed))
    except (ParamError, ValueError) as e:
        raise CliError(EXIT_ARGS, str(e))
    rows = [
        {"w_coords": format_coords(w), "hits": h, "samples": rep.samples,
         "frequency": f"{h / rep.samples:.6f}", "bound": str(rep.bound)}
        for w, h in rep.hits.items()
    ]
    _write_text(args.out, _table(rows, HITPROB_HEADER, args.format))
    print(f"max frequency {rep.max_frequency:.6f} vs min(1, bound) = {rep.capped_bound}", file=sys.stderr)
    ok = rep.weights_in_range and rep.max_frequency <= rep.capped_bound
    return EXIT_OK if ok else EXIT_FAIL


def cmd_reduce(args) -> int:
    _check_solver(args.solver)
    params = resolve_params(args.n, args.k, args.L, args.rho, args.strict)
    m = params.num_regions
    hidden = args.hidden if args.hidden else list(range(1, m + 1))
    rows = []
    for h in hidden:
        if not 1 <= h <= m:
            raise CliError(EXIT_ARGS, f"--hidden {h} outside [1, {m}]")
        for t in range(args.trials):
            s = args.seed + t
            try:
                res = reduce_tarski_to_ordered_search(
                    SOLVERS[args.solver], OrderedSearchInstance(m, h), params, SeededRng(s), audit=True
                )
            except SolverFailure as e:
                print(f"reduction failure (hidden={h}, seed={s}): {e}", file=sys.stderr)
                return EXIT_FAIL
            rows.append({
                "hidden": h, "seed": s, "index": res.index,
                "halted_on_yes": str(res.halted_on_yes).lower(),
                "ordered_queries": res.ordered_queries, "tarski_queries": res.tarski_queries,
                "correct": str(res.index == h).lower(),
            })
    header = ["hidden", "seed", "index", "halted_on_yes", "ordered_queries", "tarski_queries", "correct"]
    _write_text(args.out, _table(rows, header, args.format))
    return EXIT_OK if all(r["correct"] == "true" for r in rows) else EXIT_FAIL


def cmd_trace(args) -> int:
    _check_solver(args.solver)
    params = resolve_params(args.n, args.k, args.L, args.rho, args.strict)
    try:
        tr = posterior_progress_trace(SOLVERS[args.solver], params, SeededRng(args.seed), m=args.m)
    except ValueError as e:
        raise CliError(EXIT_ARGS, str(e))
    bases = list(params.region_bases)
    rows = []
    for t in range(len(tr.P)):
        row = {
            "step": t,
            "query": format_coords(tr.queries[t - 1]) if t else "",
            "out_of_tube": str(tr.out_of_tube[t - 1]).lower() if t else "",
            "P_bar": "" if tr.P_bar[t] is None else f"{tr.P_bar[t]:.6f}",
        }
        for b in bases:
            row[f"P_star_{b}"] = f"{tr.P_star[t][b]:.6f}"
        rows.append(row)
    header = ["step", "query", "out_of_tube", "P_bar"] + [f"P_star_{b}" for b in bases]
    _write_text(args.out, _table(rows, header, args.format))
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--strict", action="store_true", help="require the strict tube regime")

    tube = argparse.ArgumentParser(add_help=False)
    tube.add_argument("--n", type=int)
    tube.add_argument("--k", type=int)
    tube.add_argument("--L", type=int, default=None)
    tube.add_argument("--rho", type=int, default=None)

    p = argparse.ArgumentParser(prog="tarski-lab", description="Herringbone Tarski instances and solvers")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common, tube], help="generate an instance file")
    g.add_argument("--j", type=int, default=None, help="override the sampled fixed-point index")
    g.add_argument("--spine", default=None, help="explicit spine, e.g. 0/0,0/1,1/1,2/1,2/2")
    g.add_argument("--reveal", action="store_true", help="print the fixed-point weight")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", parents=[common], help="exhaustively verify an instance file")
    v.add_argument("path")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", parents=[common], help="run a solver on an instance file")
    s.add_argument("path")
    s.add_argument("--solver", default="herringbone")
    s.add_argument("--transcript", default=None, help="write the query log here")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", parents=[common], help="benchmark sweep over (n, k)")
    b.add_argument("--n", type=_int_list, required=True)
    b.add_argument("--k", type=_int_list, required=True)
    b.add_argument("--L", type=int, default=None)
    b.add_argument("--rho", type=int, default=None)
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--solver", type=_str_list, default=["herringbone"])
    b.add_argument("--curves", default=None, help="also write bound curves per cell to this path")
    b.set_defaults(func=cmd_bench)

    h = sub.add_parser("hitprob", parents=[common], help="spine-hit Monte Carlo")
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--k", type=int, required=True)
    h.add_argument("--L", type=int, required=True)
    h.add_argument("--rho", type=int, default=None, help="slice spacing (default k(n-1))")
    h.add_argument("--a", type=int, required=True)
    h.add_argument("--b", type=int, required=True)
    h.add_argument("--witnesses", type=int, default=50)
    h.add_argument("--samples", type=int, default=10000)
    h.set_defaults(func=cmd_hitprob)

    r = sub.add_parser("reduce", parents=[common, tube], help="ordered-search reduction runs")
    r.add_argument("--solver", default="herringbone")
    r.add_argument("--hidden", type=_int_list, default=None)
    r.add_argument("--trials", type=int, default=100)
    r.set_defaults(func=cmd_reduce)

    t = sub.add_parser("trace", parents=[common, tube], help="exact posterior progress trace")
    t.add_argument("--solver", default="herringbone")
    t.add_argument("--m", type=int, default=1)
    t.set_defaults(func=cmd_trace)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ARGS if e.code else EXIT_OK
    if args.command in ("reduce", "trace") and (args.n is None or args.k is None):
        print("error: --n and --k are required", file=sys.stderr)
        return EXIT_ARGS
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (ShapeError, ParamError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
