"""Command-line interface: ``landau1d <command> [options]``.

Tables are written as CSV preceded by ``#`` comment lines that record the
package version, the full configuration and the seed; reports are JSON.
Numbers are printed with 15 significant digits.  Failures print a JSON
object to stderr and exit nonzero (1: check failed / verdict false,
2: invalid input, 3: numerical failure).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .certificates import (BoundParams, build_partition, no_binding_certificate,
                           partition_check, theorem_thresholds)
from .errors import InvalidInputError, Landau1DError
from .interactions import (det_coefficients, eval_w, oracle_w_direct, oracle_w_slater_pair,
                           pair_coefficients, slater_pair_coefficients)
from .models import ModelFamily, model_at, parse_model
from .potentials import DEFAULT_QUAD, Grid1D, vm_table
from .spectral import (ScfOptions, exact_two_electron, hartree, nmax_scan, physical_energy,
                       suggest_grid)

PARAMS_ENV = "LANDAU1D_PARAMS"
EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 1, 2, 3


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.15g}"
    return str(v)


# ---------------------------------------------------------------------------
# argument parsing helpers

_POWER = re.compile(r"^\s*(?:([0-9.eE+\-]+)\s*\*\s*)?Z\s*(?:\^|\*\*)\s*([0-9.eE+\-]+)\s*$")


def parse_field(text: str, Z: float | None) -> float:
    """B as a number or a power law in Z: '1e7', 'Z^4', '2*Z^3.5', 'Z**3'."""
    m = _POWER.match(text)
    if m:
        if Z is None:
            raise InvalidInputError(f"field expression {text!r} needs --Z")
        coef = float(m.group(1)) if m.group(1) else 1.0
        return coef * Z ** float(m.group(2))
    try:
        return float(text)
    except ValueError:
        raise InvalidInputError(f"cannot parse field strength {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidInputError(f"expected comma-separated integers, got {text!r}") from None


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidInputError(f"expected comma-separated numbers, got {text!r}") from None


def parse_grid(text: str | None) -> dict:
    """'L=40,n=4001' or 'h=0.05'."""
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in ("L", "n", "h"):
            raise InvalidInputError(f"unknown grid key {key!r} (use L, n or h)")
        try:
            out[key] = int(val) if key == "n" else float(val)
        except ValueError:
            raise InvalidInputError(f"bad grid value {part!r}") from None
    return out


def make_grid(spec: dict, Z: float, B: float, model) -> Grid1D:
    if "L" in spec and "n" in spec:
        return Grid1D(spec["L"], spec["n"])
    if "n" in spec:
        raise InvalidInputError("grid n given without L")
    g = suggest_grid(Z, B, model_at(model, 1), h=spec.get("h"), min_L=spec.get("L", 0.0))
    return g


def load_params(path: str | None) -> tuple[BoundParams, str]:
    path = path or os.environ.get(PARAMS_ENV)
    if path:
        return BoundParams.load(path), path
    return BoundParams(), "defaults"


def positive(name: str, v: float) -> float:
    if not (v > 0 and math.isfinite(v)):
        raise InvalidInputError(f"{name} must be positive and finite")
    return v


# ---------------------------------------------------------------------------
# output

def header_lines(config: dict) -> list[str]:
    return [f"# landau1d {__version__}",
            "# config: " + json.dumps(config, sort_keys=True, default=str),
            f"# seed: {config.get('seed', 0)}"]


def write_table(path: str | None, config: dict, columns: Sequence[str], rows) -> None:
    buf = io.StringIO()
    for line in header_lines(config):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    _emit(path, buf.getvalue())


def write_json(path: str | None, config: dict, payload: dict) -> None:
    doc = {"version": __version__, "config": config, "seed": config.get("seed", 0), **payload}
    _emit(path, json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.15g}")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _emit(path: str | None, text: str) -> None:
    if path and path != "-":
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def read_table(path: str) -> tuple[list[str], list[str], list[list[str]]]:
    """(comment lines, column names, rows) of a CSV written by this CLI."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        raise InvalidInputError(f"{path}: no table found")
    rows = list(csv.reader(body))
    return comments, rows[0], rows[1:]


# ---------------------------------------------------------------------------
# commands

def cmd_potentials_table(a, config) -> int:
    ms = parse_int_list(a.m)
    if a.points < 1:
        raise InvalidInputError("--points must be >= 1")
    xs = np.linspace(a.xmin, a.xmax, a.points)
    table = vm_table(ms, xs, DEFAULT_QUAD)
    write_table(a.out, config, ["x"] + [f"V_{m}" for m in ms],
                ([x] + list(table[:, i]) for i, x in enumerate(xs)))
    return 0


def _coeffs(kind: str, ms: list[int]):
    if kind == "product":
        if len(ms) != 2:
            raise InvalidInputError("--kind product needs two indices")
        return pair_coefficients(*ms)
    if kind == "slater":
        if len(ms) != 2:
            raise InvalidInputError("--kind slater needs two indices")
        return slater_pair_coefficients(*ms)
    if kind == "det":
        return det_coefficients(ms)
    raise InvalidInputError(f"unknown kind {kind!r}")


def cmd_interactions_coeffs(a, config) -> int:
    cv = _coeffs(a.kind, parse_int_list(a.m))
    exact = cv.exact or (None,) * len(cv.weights)
    write_table(a.out, config, ["index", "weight", "exact"],
                ([j, w, str(e) if e is not None else ""]
                 for j, (w, e) in enumerate(zip(cv.weights, exact))))
    return 0


def cmd_interactions_verify(a, config) -> int:
    xs = parse_float_list(a.x)
    rows, worst = [], 0.0
    for m1 in range(a.max_m + 1):
        for m2 in range(m1, a.max_m + 1):
            for kind in ("product", "slater"):
                if kind == "slater" and m1 == m2:
                    continue
                cv = pair_coefficients(m1, m2) if kind == "product" else \
                    slater_pair_coefficients(m1, m2)
                oracle = oracle_w_direct if kind == "product" else oracle_w_slater_pair
                for x in xs:
                    o = oracle(m1, m2, x)
                    v = eval_w(cv, x)
                    rel = abs(v - o) / abs(o)
                    worst = max(worst, rel)
                    rows.append([kind, m1, m2, x, v, o, rel, rel <= a.tol])
    write_table(a.out, config, ["kind", "m1", "m2", "x", "coefficients", "oracle",
                                "rel_diff", "pass"], rows)
    ok = worst <= a.tol
    print(json.dumps({"checked": len(rows), "worst_rel_diff": float(f"{worst:.15g}"),
                      "tol": a.tol, "pass": ok}), file=sys.stderr)
    return 0 if ok else EXIT_FAIL


def cmd_solve(a, config) -> int:
    model = parse_model(a.model)
    Z, B = positive("Z", a.Z), positive("B", parse_field(a.B, a.Z))
    grid = make_grid(parse_grid(a.grid), Z, B, model)
    opts = ScfOptions(max_iterations=a.max_iter, mixing=a.mixing, energy_tol=a.energy_tol)
    spec = model_at(model, a.N)
    if a.solver == "exact2":
        if a.N != 2:
            raise InvalidInputError("exact2 solver needs --N 2")
        e = exact_two_electron(Z, B, spec, grid)
        info = {"iterations": 0, "residual": 0.0, "converged": True}
    else:
        r = hartree(a.N, Z, B, spec, grid, opts)
        e = r.energy
        info = {"iterations": r.iterations, "residual": r.residual, "converged": r.converged,
                "lower_bound": r.lower_bound, "edge_mass": r.edge_mass}
    config["B_value"] = B
    write_json(a.out, config, {
        "energy_scaled": e, "energy_physical": physical_energy(e, a.N, B),
        "grid": {"L": grid.L, "n": grid.n, "h": grid.h}, **info})
    return 0


def cmd_scan_nmax(a, config) -> int:
    model = parse_model(a.model)
    Z, B = positive("Z", a.Z), positive("B", parse_field(a.B, a.Z))
    grid = make_grid(parse_grid(a.grid), Z, B, model)
    opts = ScfOptions(max_iterations=a.max_iter, energy_tol=a.energy_tol)
    res = nmax_scan(Z, B, model, grid, a.cap, a.solver, opts, workers=a.workers)
    config.update(B_value=B, grid={"L": grid.L, "n": grid.n})
    write_table(a.out, config, ["N", "energy", "bound_flag", "iterations", "residual", "error"],
                ([r.N, r.energy, r.bound, r.iterations, r.residual, r.error] for r in res.rows))
    print(json.dumps({"n_max": res.n_max, "truncated": res.truncated,
                      "estimate": "hartree upper bounds" if a.solver == "hartree" else a.solver}),
          file=sys.stderr)
    return 0


def cmd_certify(a, config) -> int:
    model = parse_model(a.model)
    params, source = load_params(a.params)
    Z, B = positive("Z", a.Z), positive("B", parse_field(a.B, a.Z))
    report = no_binding_certificate(a.N, Z, B, model, params)
    config.update(B_value=B, params_source=source)
    write_json(a.out, config, report.to_dict())
    return 0 if report.verdict else EXIT_FAIL


def cmd_thresholds(a, config) -> int:
    model = parse_model(a.model)
    params, source = load_params(a.params)
    Z, B = positive("Z", a.Z), positive("B", parse_field(a.B, a.Z))
    rows = theorem_thresholds(Z, B, model, params)
    config.update(B_value=B, params_source=source)
    write_table(a.out, config, ["name", "N_threshold", "applicable", "note"],
                ([r.name, r.N_threshold, r.applicable, r.note] for r in rows))
    return 0


def cmd_partition_check(a, config) -> int:
    Ns = parse_int_list(a.N)
    part = build_partition(max(Ns), a.rho, a.delta, a.sharpness)
    res = partition_check(part, Ns, a.delta, a.samples, seed=a.seed)
    write_table(a.out, config, ["N", "scaled_sup", "inner_sup", "outer_sup"],
                ([n, res.per_N[n], res.inner[n], res.outer[n]] for n in sorted(res.per_N)))
    print(json.dumps(_clean({"lambda": res.lambda_estimate, "loglog_slope": res.loglog_slope,
                             "max_normalization_error": res.max_normalization_error})),
          file=sys.stderr)
    return 0


def _numeric_columns(cols, rows):
    out = {}
    for j, c in enumerate(cols):
        try:
            out[c] = np.array([float(r[j]) for r in rows])
        except ValueError:
            continue
    return out


def cmd_diff(a, config) -> int:
    _, ca, ra = read_table(a.a)
    _, cb, rb = read_table(a.b)
    if ca != cb or len(ra) != len(rb):
        print(json.dumps({"equal": False, "reason": "shape or columns differ"}))
        return EXIT_FAIL
    worst, worst_col = 0.0, None
    for j, c in enumerate(ca):
        for x, y in zip(ra, rb):
            try:
                u, v = float(x[j]), float(y[j])
            except ValueError:
                if x[j] != y[j]:
                    print(json.dumps({"equal": False, "reason": f"column {c} differs"}))
                    return EXIT_FAIL
                continue
            if u == v or (math.isnan(u) and math.isnan(v)):
                continue
            d = abs(u - v) / max(abs(u), abs(v), a.atol / a.rtol if a.rtol > 0 else 1.0)
            if d > worst:
                worst, worst_col = d, c
    ok = worst <= a.rtol
    print(json.dumps({"equal": ok, "max_rel_diff": float(f"{worst:.15g}"), "column": worst_col}))
    return 0 if ok else EXIT_FAIL


def cmd_replot(a, config) -> int:
    """Re-emit selected columns of a CLI table as plot-ready CSV."""
    _, cols, rows = read_table(a.table)
    num = _numeric_columns(cols, rows)
    want = [a.x] + (a.y.split(",") if a.y else [c for c in num if c != a.x])
    missing = [c for c in want if c not in num]
    if missing:
        raise InvalidInputError(f"non-numeric or unknown column(s): {', '.join(missing)}")
    config["source"] = a.table
    write_table(a.out, config, want, zip(*(num[c] for c in want)))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="landau1d",
                                description="One-dimensional atoms in strong magnetic fields.")
    p.add_argument("--version", action="version", version=f"landau1d {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    pot = sub.add_parser("potentials").add_subparsers(dest="action", required=True)
    t = pot.add_parser("table", help="V_m on a uniform x grid")
    t.add_argument("--m", required=True)
    t.add_argument("--xmin", type=float, default=0.0)
    t.add_argument("--xmax", type=float, default=10.0)
    t.add_argument("--points", type=int, default=101)
    common(t)
    t.set_defaults(func=cmd_potentials_table)

    inter = sub.add_parser("interactions").add_subparsers(dest="action", required=True)
    c = inter.add_parser("coeffs", help="convex-combination weights")
    c.add_argument("--kind", choices=["product", "slater", "det"], default="product")
    c.add_argument("--m", required=True)
    common(c)
    c.set_defaults(func=cmd_interactions_coeffs)
    v = inter.add_parser("verify", help="cross-check coefficients against quadrature")
    v.add_argument("--max-m", type=int, default=6)
    v.add_argument("--tol", type=float, default=1e-6)
    v.add_argument("--x", default="0.1,0.5,1,2,5,10")
    common(v)
    v.set_defaults(func=cmd_interactions_verify)

    s = sub.add_parser("solve", help="ground-state energy of one model")
    s.add_argument("--model", default="m0")
    s.add_argument("--Z", type=float, required=True)
    s.add_argument("--B", required=True)
    s.add_argument("--N", type=int, default=1)
    s.add_argument("--solver", choices=["hartree", "exact2"], default="hartree")
    s.add_argument("--grid", default=None, help="L=40,n=4001 or h=0.05 (default: automatic)")
    s.add_argument("--max-iter", type=int, default=ScfOptions.max_iterations)
    s.add_argument("--mixing", type=float, default=ScfOptions.mixing)
    s.add_argument("--energy-tol", type=float, default=ScfOptions.energy_tol)
    common(s)
    s.set_defaults(func=cmd_solve)

    scan = sub.add_parser("scan").add_subparsers(dest="action", required=True)
    n = scan.add_parser("nmax", help="add electrons until binding stops")
    n.add_argument("--model", default="m0")
    n.add_argument("--Z", type=float, required=True)
    n.add_argument("--B", required=True)
    n.add_argument("--cap", type=int, default=8)
    n.add_argument("--solver", choices=["hartree", "exact2"], default="hartree")
    n.add_argument("--grid", default=None)
    n.add_argument("--workers", type=int, default=1)
    n.add_argument("--max-iter", type=int, default=ScfOptions.max_iterations)
    n.add_argument("--energy-tol", type=float, default=ScfOptions.energy_tol)
    common(n)
    n.set_defaults(func=cmd_scan_nmax)

    ce = sub.add_parser("certify", help="no-binding certificate (exit 0 when it passes)")
    ce.add_argument("--model", default="m0")
    ce.add_argument("--Z", type=float, required=True)
    ce.add_argument("--B", required=True)
    ce.add_argument("--N", type=int, required=True)
    ce.add_argument("--params", default=None, help=f"JSON file (or ${PARAMS_ENV})")
    common(ce)
    ce.set_defaults(func=cmd_certify)

    th = sub.add_parser("thresholds", help="closed-form electron-number thresholds")
    th.add_argument("--model", default="m0")
    th.add_argument("--Z", type=float, required=True)
    th.add_argument("--B", required=True)
    th.add_argument("--params", default=None)
    common(th)
    th.set_defaults(func=cmd_thresholds)

    pa = sub.add_parser("partition").add_subparsers(dest="action", required=True)
    pc = pa.add_parser("check", help="empirical gradient constant of the partition")
    pc.add_argument("--N", default="4,16,64")
    pc.add_argument("--delta", type=float, default=1.0)
    pc.add_argument("--rho", type=float, default=1.0)
    pc.add_argument("--sharpness", type=float, default=3.0)
    pc.add_argument("--samples", type=int, default=10_000)
    common(pc, seed=True)
    pc.set_defaults(func=cmd_partition_check)

    d = sub.add_parser("diff", help="compare two CLI tables numerically")
    d.add_argument("a")
    d.add_argument("b")
    d.add_argument("--rtol", type=float, default=1e-12)
    d.add_argument("--atol", type=float, default=1e-300)
    d.set_defaults(func=cmd_diff)

    r = sub.add_parser("replot", help="select numeric columns of a CLI table")
    r.add_argument("table")
    r.add_argument("--x", required=True)
    r.add_argument("--y", default=None)
    common(r)
    r.set_defaults(func=cmd_replot)
    return p


def _config(a) -> dict:
    cfg = {k: v for k, v in vars(a).items() if k not in ("func",)}
    cfg.setdefault("seed", 0)
    return cfg


def _error(kind: str, exc: Exception, code: int) -> int:
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    for attr in ("best_estimate", "error_bound", "suggested_L", "worst_x", "violation"):
        if hasattr(exc, attr):
            payload[attr] = getattr(exc, attr)
    print(json.dumps(_clean(payload)), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return a.func(a, _config(a))
    except InvalidInputError as exc:
        return _error("invalid-input", exc, EXIT_INPUT)
    except Landau1DError as exc:
        return _error("numerical", exc, EXIT_NUMERIC)
    except (OSError, json.JSONDecodeError) as exc:
        return _error("io", exc, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
