"""Command-line front end.

Every command prints human-readable output followed by one JSON summary
line on stdout (the last line). Exit codes: 0 success, 1 input error,
2 numeric failure.

Tables written with ``--out`` are CSV (header row, complex values as
``*_re``/``*_im`` column pairs) or JSON lines, chosen with ``--format``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import corpus
from .diagnostics import (
    certificate_table,
    certify,
    divergence_onset,
    eigenvalue_tracks,
    empirical_radius,
    kappa_sweep,
    partial_sum_onset,
    partial_sum_table,
    real_log_exists,
)
from .linalg import expm, spectral_norm
from .magnus import bch_terms, magnus_terms
from .ode import MatrixFunction, StepSizeUnderflow, solve
from .polymat import PiecewisePolyMatrix, format_fraction, loads, to_document


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); 2 is reserved for numeric failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers


def _resolve(args) -> tuple[str, MatrixFunction, PiecewisePolyMatrix | None]:
    source = args.example or args.model or args.source
    if source is None:
        raise InputError("no model given; use --example NAME or --model FILE")
    key = source.split(":", 1)[1] if source.startswith("examples:") else source
    if key in corpus.NAMES:
        ex = corpus.get(key)
        return ex.name, ex.function, ex.poly
    path = Path(source)
    if not path.is_file():
        raise InputError(f"{source!r} is neither a built-in example ({', '.join(corpus.NAMES)}) nor a file")
    try:
        poly = loads(path.read_text())
    except ValueError as exc:
        raise InputError(f"cannot read model {source}: {exc}") from exc
    return path.name, MatrixFunction.from_poly(poly, path.stem), poly


def _kappa(args) -> complex:
    if args.alpha is not None:
        return complex(np.exp(1j * args.alpha))
    return complex(args.kappa_re, args.kappa_im)


def _write_table(path, rows: list[dict], fmt: str):
    if path is None:
        return
    path = Path(path)
    with path.open("w", newline="") as fh:
        if fmt == "json-lines":
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        else:
            if not rows:
                return
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)


def _matrix_rows(m: np.ndarray) -> list[dict]:
    return [{"i": i + 1, "j": j + 1, "re": float(np.real(m[i, j])), "im": float(np.imag(m[i, j]))}
            for i in range(m.shape[0]) for j in range(m.shape[1])]


def _show_matrix(m) -> str:
    m = np.asarray(m)
    if np.iscomplexobj(m) and np.abs(m.imag).max() == 0:
        m = m.real
    return np.array2string(m, precision=10, max_line_width=160)


def _show_exact(rows) -> str:
    return "\n".join("  [" + ", ".join(rows_i) + "]" for rows_i in rows)


def _complex(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _event_dict(e) -> dict:
    return {
        "t_star": e.t_star,
        "alpha": e.alpha,
        "lambda": _complex(e.lambda_star),
        "tracks": list(e.track_indices),
        "defective": e.defective,
        "winding": e.winding,
        "alt_winding": e.alt_winding,
        "qualifies": e.qualifies,
        "unstable": e.unstable,
    }


def _t(args, a: MatrixFunction) -> float:
    t = a.domain[1] if args.t is None else args.t
    lo, hi = a.domain
    if not lo <= t <= hi:
        raise InputError(f"t={t} outside the domain [{lo}, {hi}]")
    return t


def _t_max(args, a: MatrixFunction, default: float | None = None) -> float:
    t = args.t_max if args.t_max is not None else (default if default is not None else a.domain[1])
    if not a.domain[0] < t <= a.domain[1]:
        raise InputError(f"t-max={t} outside the domain {a.domain}")
    return t


def _order(args, default: int) -> int:
    n = default if args.order is None else args.order
    if n < 1:
        raise InputError("order must be at least 1")
    return n


# ---------------------------------------------------------------------------
# commands


def cmd_examples(args) -> dict:
    names = [args.source.split(":", 1)[-1]] if args.source else list(corpus.NAMES)
    if args.example:
        names = [args.example]
    out = []
    for name in names:
        try:
            ex = corpus.get(name)
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
        lo, hi = ex.function.domain
        flag = "  [numeric-only]" if ex.numeric_only else ""
        print(f"{ex.name}: {ex.summary}{flag}")
        print(f"    {ex.formula}    t in [{lo:g}, {hi:g}]")
        out.append({"name": ex.name, "domain": [lo, hi], "numeric_only": ex.numeric_only, "formula": ex.formula})
    return {"count": len(out), "examples": out}


def cmd_terms(args) -> dict:
    name, a, poly = _resolve(args)
    if poly is None:
        raise InputError(f"{name} is not piecewise polynomial; exact terms are unavailable")
    n = _order(args, 4)
    series = magnus_terms(poly, n)
    t = _t(args, a)
    norms = series.term_norms(t)
    for k, term in enumerate(series.terms, 1):
        print(f"Omega_{k} =")
        for seg_idx, seg in enumerate(term.segments):
            if len(term.segments) > 1:
                lo, hi = term.breakpoints[seg_idx], term.breakpoints[seg_idx + 1]
                print(f"  on [{format_fraction(lo)}, {format_fraction(hi)}]:")
            print(_show_exact([[str(p) for p in row] for row in seg.entries()]))
    _write_table(args.out, [{"n": k, "t": t, "norm": float(v)} for k, v in enumerate(norms, 1)], args.format)
    if args.terms_out:
        with open(args.terms_out, "w") as fh:
            for k, term in enumerate(series.terms, 1):
                fh.write(json.dumps({"n": k, "term": to_document(term)}) + "\n")
    nonzero = sum(1 for w in series.terms if not w.is_zero())
    return {"model": name, "order": n, "t": t, "nonzero_terms": nonzero, "norms": [float(v) for v in norms]}


def cmd_certify(args) -> dict:
    name, a, _ = _resolve(args)
    if args.t_max is not None:
        t_max = _t_max(args, a)
        grid = np.linspace(a.domain[0], t_max, args.samples + 1)
        table = certificate_table(a, grid, args.tol)
        _write_table(args.out, [c.as_row() for c in table], args.format)
        cross = next((c.t for c in table if c.verdict.value == "Unknown"), None)
        print(f"{name}: first grid point without a guarantee: {cross}")
        return {"model": name, "t_max": t_max, "samples": args.samples, "first_unknown": cross}
    t = _t(args, a)
    cert = certify(a, t, args.tol)
    print(f"{name} at t = {t:g}: gamma = {cert.gamma:.10g}, verdict {cert.verdict.value}")
    for label, r, ok in cert.thresholds:
        print(f"    gamma < {label:<10s} ({r:.6f}): {'yes' if ok else 'no'}")
    _write_table(args.out, [cert.as_row()], args.format)
    return {"model": name, "t": t, "gamma": cert.gamma, "verdict": cert.verdict.value,
            "thresholds": {label: ok for label, _, ok in cert.thresholds}}


def cmd_solve(args) -> dict:
    name, a, _ = _resolve(args)
    t = _t(args, a)
    kappa = _kappa(args)
    y = solve(a, t, kappa, args.tol)
    print(f"Y({t:g}; kappa={kappa:g}) =")
    print(_show_matrix(y))
    _write_table(args.out, _matrix_rows(y), args.format)
    summary = {"model": name, "t": t, "kappa": _complex(kappa), "norm": spectral_norm(y),
               "eigenvalues": [_complex(z) for z in np.linalg.eigvals(y)]}
    if kappa.imag == 0:
        verdict = real_log_exists(y.real).verdict.value
        print(f"real logarithm: {verdict}")
        summary["real_log"] = verdict
    return summary


def cmd_radius(args) -> dict:
    name, a, poly = _resolve(args)
    if poly is None:
        raise InputError(f"{name} is not piecewise polynomial; exact terms are unavailable")
    n = _order(args, 30)
    if n < 20:
        raise InputError("the radius estimate needs --order of at least 20")
    series = magnus_terms(poly, n)
    t_max = _t_max(args, a)
    lo = a.domain[0] + 1e-3 * (t_max - a.domain[0])
    onset = divergence_onset(series, lo, t_max, samples=args.samples)
    grid = np.linspace(lo, t_max, args.samples + 1)
    secondary = partial_sum_onset(series, a, grid, n)
    summary = {"model": name, "order": n, "t_max": t_max, "divergence_onset": onset,
               "partial_sum_blowup": secondary}
    if args.t is not None:
        r = empirical_radius(series, _t(args, a))
        summary["t"] = args.t
        summary["radius"] = None if math.isinf(r) else r
        print(f"empirical radius at t = {args.t:g}: {r:.6g}")
    print(f"{name}: divergence onset (radius = 1) at t = {onset}; partial sums blow up at t = {secondary}")
    if args.out:
        entries = ((0, 0), (1, 2)) if a.dim >= 3 else ((0, 0), (0, 1))
        orders = tuple(k for k in (15, 20, 25, 30) if k <= n) or (n,)
        _write_table(args.out, partial_sum_table(series, grid, orders, entries), args.format)
    return summary


def cmd_trajectory(args) -> dict:
    name, a, _ = _resolve(args)
    kappa = _kappa(args)
    t_max = _t_max(args, a)
    traj = eigenvalue_tracks(a, kappa, t_max, samples=args.samples, tol=args.tol)
    rows = []
    for t, vals in zip(traj.grid, traj.tracks):
        row = {"t": float(t)}
        for k, z in enumerate(vals, 1):
            row[f"lambda{k}_re"] = float(z.real)
            row[f"lambda{k}_im"] = float(z.imag)
        rows.append(row)
    _write_table(args.out, rows, args.format)
    for e in traj.events:
        print(f"collision at t = {e.t_star:.8f}, lambda = {e.lambda_star:.6f}, "
              f"defective = {e.defective}, winding = {e.winding}")
    for w in traj.warnings:
        print(f"warning: {w}")
    negative = [e for e in traj.events if e.on_negative_axis]
    return {"model": name, "kappa": _complex(kappa), "t_max": t_max, "points": len(traj.grid),
            "events": [_event_dict(e) for e in traj.events], "negative_axis_collisions": len(negative),
            "warnings": len(traj.warnings)}


def cmd_sweep(args) -> dict:
    name, a, _ = _resolve(args)
    t_max = _t_max(args, a, default=min(1.0, a.domain[1]))
    res = kappa_sweep(a, t_max, alpha_samples=args.alpha_samples, samples=args.samples, tol=args.tol)
    _write_table(args.out, [{"alpha": e.alpha, "t_star": e.t_star, "lambda_re": e.lambda_star.real,
                             "lambda_im": e.lambda_star.imag, "defective": e.defective,
                             "winding": e.winding, "qualifies": e.qualifies} for e in res.collisions],
                 args.format)
    for e in res.collisions:
        print(f"collision alpha = {e.alpha:.6f}, t = {e.t_star:.6f}, lambda = {e.lambda_star:.6f}, "
              f"defective = {e.defective}, winding = {e.winding}")
    best = res.best
    if best is None:
        print(f"{name}: no defective encircling collision for t <= {t_max:g}")
    else:
        print(f"{name}: conjectured divergence onset t* = {best.t_star:.6f} at alpha* = {best.alpha:.6f}")
    onset = None if best is None else {"alpha": best.alpha, "t_star": best.t_star,
                                       "lambda": _complex(best.lambda_star), "winding": best.winding}
    return {"model": name, "t_max": t_max, "collisions": len(res.collisions),
            "conjectured_divergence_onset": onset}


def _parse_matrix(text: str, label: str):
    try:
        m = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{label} is not a JSON matrix: {exc}") from None
    if not isinstance(m, list) or not m or any(not isinstance(r, list) or len(r) != len(m) for r in m):
        raise InputError(f"{label} must be a square JSON matrix")
    return [[str(x) if isinstance(x, (int, str)) else _exact_float(x, label) for x in r] for r in m]


def _exact_float(x, label):
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    raise InputError(f"{label}: entries must be integers or fraction strings such as \"1/3\"")


def cmd_bch(args) -> dict:
    a1 = _parse_matrix(args.a1, "--a1") if args.a1 else corpus.BCH_DEFAULT[0]
    a2 = _parse_matrix(args.a2, "--a2") if args.a2 else corpus.BCH_DEFAULT[1]
    n = _order(args, 4)
    series = bch_terms(a1, a2, n)
    total = None
    for k, term in enumerate(series.terms, 1):
        value = term.evaluate_exact(2)
        print(f"B_{k} =")
        print(_show_exact([[format_fraction(x) for x in row] for row in value]))
        m = np.array([[float(x) for x in row] for row in value])
        total = m if total is None else total + m
    target = expm(_to_float(a1)) @ expm(_to_float(a2))
    residual = spectral_norm(expm(total) - target)
    print(f"|exp(B_1 + ... + B_{n}) - exp(A1) exp(A2)|_2 = {residual:.3e}")
    return {"order": n, "residual": residual}


def _to_float(m) -> np.ndarray:
    return np.array([[float(Fraction(x)) for x in r] for r in m])


COMMANDS = {
    "examples": cmd_examples,
    "terms": cmd_terms,
    "certify": cmd_certify,
    "solve": cmd_solve,
    "radius": cmd_radius,
    "trajectory": cmd_trajectory,
    "sweep": cmd_sweep,
    "bch": cmd_bch,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("source", nargs="?", help="built-in example (ex4 or examples:ex4) or model file")
    common.add_argument("--model", help="JSON model file of a piecewise polynomial A(t)")
    common.add_argument("--example", choices=corpus.NAMES, help="built-in example")
    common.add_argument("--t", type=float, help="evaluation time")
    common.add_argument("--t-max", type=float, help="end of the time range")
    common.add_argument("--order", type=int, help="number of Magnus terms")
    common.add_argument("--kappa-re", type=float, default=1.0)
    common.add_argument("--kappa-im", type=float, default=0.0)
    common.add_argument("--alpha", type=float, help="kappa = exp(i alpha); overrides --kappa-re/--kappa-im")
    common.add_argument("--tol", type=float, default=1e-10, help="integrator / quadrature tolerance")
    common.add_argument("--samples", type=int, default=200, help="time samples for tables and tracks")
    common.add_argument("--out", help="write the command's table here")
    common.add_argument("--format", choices=("csv", "json-lines"), default="csv")

    parser = _Parser(prog="magnusconv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("examples", parents=[common], help="list or describe the built-in examples")
    p = sub.add_parser("terms", parents=[common], help="exact Magnus terms and their norms")
    p.add_argument("--terms-out", help="write the exact terms as JSON lines")
    sub.add_parser("certify", parents=[common], help="convergence certificate from gamma(t)")
    sub.add_parser("solve", parents=[common], help="fundamental solution Y(t; kappa)")
    sub.add_parser("radius", parents=[common], help="empirical radius and divergence onset")
    sub.add_parser("trajectory", parents=[common], help="eigenvalue tracks of Y(t; kappa)")
    p = sub.add_parser("sweep", parents=[common], help="search |kappa| = 1 for encircling defective collisions")
    p.add_argument("--alpha-samples", type=int, default=64)
    p = sub.add_parser("bch", parents=[common], help="BCH series of log(exp(A1) exp(A2))")
    p.add_argument("--a1", help="JSON matrix, e.g. '[[0, 1], [0, 0]]'")
    p.add_argument("--a2", help="JSON matrix")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol <= 0:
        parser.error("--tol must be positive")
    if args.samples < 100 and args.command in ("trajectory", "sweep"):
        parser.error("--samples must be at least 100")
    try:
        summary = COMMANDS[args.command](args)
    except (InputError, KeyError, FileNotFoundError, TypeError) as exc:
        return _fail(args.command, 1, exc)
    except (ArithmeticError, StepSizeUnderflow, np.linalg.LinAlgError) as exc:
        return _fail(args.command, 2, exc)
    except ValueError as exc:
        # numeric kernels raise ValueError subclasses for cut/spectrum problems
        return _fail(args.command, 2 if type(exc) is not ValueError else 1, exc)
    print(json.dumps({"command": args.command, "status": "ok", **summary}, default=_jsonable))
    return 0


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return _complex(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _fail(command: str, code: int, exc: Exception) -> int:
    msg = exc.args[0] if exc.args else type(exc).__name__
    print(f"error: {msg}", file=sys.stderr)
    print(json.dumps({"command": command, "status": "error", "exit_code": code, "message": str(msg)}))
    return code


if __name__ == "__main__":
    sys.exit(main())
