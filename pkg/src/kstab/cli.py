"""Command line front end.

Exit codes: 0 success, 2 parse/validation errors on inputs, 3 invariant
violations (mathematically invalid data), 4 numerical non-convergence
(a residual report is still written).  Reports are deterministic for a
fixed configuration: exact rationals are printed as "num/den" strings,
floats with shortest round-trip repr in JSON and 17 significant digits in
CSV.
"""

from __future__ import annotations

import json
import os
import sys
from fractions import Fraction

import click
import numpy as np

from kstab import acceptance as acc
from kstab import bergman as bg
from kstab import chow as cw
from kstab import cycles as cy
from kstab import weights as wt
from kstab.laurent import (
    DegenerateLoopError,
    factorize,
    loop_from_json,
)
from kstab.quadrature import QuadratureError

EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_NONCONVERGENCE = 4


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise click.exceptions.Exit(_fail(EXIT_PARSE, f"input file not found: {path}"))
    except json.JSONDecodeError as exc:
        raise click.exceptions.Exit(
            _fail(EXIT_PARSE, f"malformed JSON in {path}: line {exc.lineno} col {exc.colno}: {exc.msg}")
        )


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    return code


def _emit(data, out, fmt):
    if fmt == "json":
        text = json.dumps(data, indent=2, sort_keys=True)
    else:
        text = _to_csv(data)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _csv_cell(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _to_csv(data):
    rows = data.get("rows")
    if rows is None:
        # flat dict -> two-column csv
        lines = ["key,value"]
        for k in sorted(data):
            lines.append(f"{k},{_csv_cell(data[k])}")
        return "\n".join(lines)
    header = data["columns"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[c]) for c in header))
    return "\n".join(lines)


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("KSTAB_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


@click.group()
def main():
    """Stability invariants of polarized degenerations."""


_common = [
    click.option("--input", "input_path", required=True, help="input JSON file"),
    click.option("--out", default=None, help="output file (stdout when omitted)"),
    click.option(
        "--format", "--report", "fmt", type=click.Choice(["json", "csv"]), default="json"
    ),
    click.option("--threads", type=int, default=None, help="worker count (or KSTAB_THREADS)"),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@main.command("factorize")
@_with_common
def cmd_factorize(input_path, out, fmt, threads):
    """Normal form left * t^A * right of a loop."""
    obj = _load_json(input_path)
    try:
        g = loop_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        sys.exit(_fail(EXIT_PARSE, f"bad loop input: {exc}"))
    try:
        fac = factorize(g)
    except DegenerateLoopError as exc:
        sys.exit(_fail(EXIT_INVARIANT, str(exc)))
    from kstab.laurent import loop_to_json

    _emit(
        {
            "weights": list(fac.weights),
            "order": list(fac.order),
            "exponents": fac.exponent_vector(),
            "left": loop_to_json(fac.left),
            "right": loop_to_json(fac.right),
        },
        out,
        fmt,
    )


@main.command("futaki")
@_with_common
@click.option("--k", "krange", default="1:10", help="Chow table levels lo:hi")
@click.option("--sign", type=click.Choice(["calibrated", "flipped"]), default="calibrated")
def cmd_futaki(input_path, out, fmt, threads, krange, sign):
    """Exact weight polynomial, Chow table and Futaki invariant."""
    obj = _load_json(input_path)
    try:
        ws = wt.weight_system_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        sys.exit(_fail(EXIT_PARSE, f"bad weight system: {exc}"))
    lo, hi = _parse_range_pair(krange)
    sign_val = wt.CALIBRATED_SIGN if sign == "calibrated" else -wt.CALIBRATED_SIGN
    try:
        report = wt.weight_report(ws, kmax=hi, sign_convention=sign_val)
    except ValueError as exc:
        sys.exit(_fail(EXIT_INVARIANT, str(exc)))
    _emit(report, out, fmt)


@main.command("chow")
@_with_common
@click.option("--loop", "loop_path", required=True, help="loop JSON file")
@click.option("--sign", type=click.Choice(["calibrated", "flipped"]), default="calibrated")
@click.option("--order", default=48, type=int, help="quadrature order")
@click.option("--tol", default=1e-6, type=float)
def cmd_chow(input_path, out, fmt, threads, loop_path, sign, order, tol):
    """Chow weight of a hypersurface degeneration, with the central-fiber
    pairing check for plane conics."""
    form_obj = _load_json(input_path)
    loop_obj = _load_json(loop_path)
    try:
        form = cw.form_from_json(form_obj)
        g = loop_from_json(loop_obj)
    except (KeyError, ValueError, TypeError) as exc:
        sys.exit(_fail(EXIT_PARSE, f"bad input: {exc}"))
    convention = "calibrated" if sign == "calibrated" else "flipped"
    try:
        ch = cw.chow_weight(form, g, convention=convention)
    except (ValueError, DegenerateLoopError) as exc:
        sys.exit(_fail(EXIT_INVARIANT, str(exc)))
    data = {"chow_weight": _frac(ch), "convention": convention}
    if form.nvars == 3 and form.degree == 2 and convention == "calibrated":
        try:
            fiber = cw.central_fiber_cycle(form, g)
            chk = cw.check_chow_inequality(g, fiber, ch=ch, order=order, tol=tol)
            data.update(
                {
                    "pairing": chk.pairing,
                    "slack": chk.slack,
                    "quad_error": chk.quad_error,
                    "inequality_satisfied": chk.satisfied,
                    "weights": list(chk.weights),
                    "section_diagonal": list(chk.exponents),
                }
            )
        except QuadratureError as exc:
            sys.exit(_fail(EXIT_NONCONVERGENCE, str(exc)))
    _emit(data, out, fmt)


@main.command("moment")
@_with_common
@click.option("--order", default=48, type=int, help="quadrature order")
@click.option("--tol", default=1e-8, type=float)
def cmd_moment(input_path, out, fmt, threads, order, tol):
    """Trace-free moment matrix of a parametrized cycle."""
    obj = _load_json(input_path)
    if order < 1 or tol <= 0:
        sys.exit(_fail(EXIT_PARSE, "order must be >= 1 and tol positive"))
    try:
        cycle = cy.cycle_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        sys.exit(_fail(EXIT_PARSE, f"bad cycle input: {exc}"))
    try:
        res = cy.moment_matrix(cycle, order=order, tol=tol)
    except QuadratureError as exc:
        sys.exit(_fail(EXIT_NONCONVERGENCE, str(exc)))
    m = res.matrix
    _emit(
        {
            "matrix_re": [[float(x) for x in row] for row in m.real],
            "matrix_im": [[float(x) for x in row] for row in m.imag],
            "trace_norm": cy.trace_norm(m),
            "volume": res.volume,
            "quad_error": res.quad_error,
            "order": res.order,
        },
        out,
        fmt,
    )


@main.command("balance")
@_with_common
@click.option("--tol", default=1e-8, type=float)
@click.option("--max-steps", default=500, type=int)
@click.option("--order", default=32, type=int)
def cmd_balance(input_path, out, fmt, threads, tol, max_steps, order):
    """Balanced-embedding iteration; CSV of residuals per step."""
    obj = _load_json(input_path)
    if tol <= 0 or max_steps < 1 or order < 1:
        sys.exit(_fail(EXIT_PARSE, "tol, max-steps and order must be positive"))
    try:
        cycle = cy.cycle_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        sys.exit(_fail(EXIT_PARSE, f"bad cycle input: {exc}"))
    res = cy.balance_iterate(cycle, max_steps=max_steps, tol=tol, order=order)
    data = {
        "columns": ["step", "residual"],
        "rows": [{"step": i, "residual": r} for i, r in enumerate(res.residuals)],
        "converged": res.converged,
        "steps": res.steps,
        "note": res.note,
    }
    if fmt == "json":
        data = {
            "converged": res.converged,
            "steps": res.steps,
            "residuals": res.residuals,
            "final_residual": res.residuals[-1] if res.residuals else None,
            "note": res.note,
        }
    _emit(data, out, fmt)
    if not res.converged:
        click.echo(
            f"non-convergence after {res.steps} steps; final residual "
            f"{res.residuals[-1] if res.residuals else float('nan'):.3e}",
            err=True,
        )
        sys.exit(EXIT_NONCONVERGENCE)


def _parse_range_pair(text):
    parts = text.split(":")
    if len(parts) == 1:
        return 1, int(parts[0])
    return int(parts[0]), int(parts[1])


def _parse_klist(text):
    """Parse k ranges: '8:64:double' doubles, 'a:b:step' steps, 'a,b,c' lists."""
    if "," in text:
        return [int(x) for x in text.split(",")]
    parts = text.split(":")
    if len(parts) == 1:
        return [int(parts[0])]
    lo, hi = int(parts[0]), int(parts[1])
    if len(parts) == 2:
        return list(range(lo, hi + 1))
    if parts[2] == "double":
        ks = []
        k = lo
        while k <= hi:
            ks.append(k)
            k *= 2
        return ks
    return list(range(lo, hi + 1, int(parts[2])))


@main.command("bergman")
@_with_common
@click.option("--k", "krange", default="8:64:double", help="levels, e.g. 8:64:double")
@click.option("--grid", default=100, type=int, help="number of radial grid points")
@click.option("--tol", default=1e-10, type=float)
def cmd_bergman(input_path, out, fmt, threads, krange, grid, tol):
    """Density-of-states run: rho, fitted first correction, discrepancy."""
    obj = _load_json(input_path)
    try:
        metric = bg.metric_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        sys.exit(_fail(EXIT_PARSE, f"bad metric input: {exc}"))
    klist = _parse_klist(krange)
    if not klist:
        sys.exit(_fail(EXIT_PARSE, f"empty level range {krange!r}"))
    if grid < 1 or tol <= 0:
        sys.exit(_fail(EXIT_PARSE, "grid must be >= 1 and tol positive"))
    s_grid = bg.default_grid(grid)
    try:
        # per-level work units are independent; results are keyed by level
        # so the outcome does not depend on scheduling
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
            rho_futs = {k: pool.submit(bg.rho, metric, k, s_grid) for k in klist}
            tv_futs = {
                k: pool.submit(bg.theta_total_variation, metric, k) for k in klist
            }
            rhos = {k: f.result() for k, f in rho_futs.items()}
            tvs = {k: f.result() for k, f in tv_futs.items()}
        a1 = (
            bg.expansion_fit(metric, klist, s_grid).a1
            if len(klist) >= 3
            else np.full(grid, np.nan)
        )
    except QuadratureError as exc:
        sys.exit(_fail(EXIT_NONCONVERGENCE, str(exc)))
    def _clean(x):
        return None if np.isnan(x) else float(x)

    rows = []
    for k in klist:
        for i, s in enumerate(s_grid):
            rows.append(
                {
                    "k": k,
                    "gridpoint": float(s),
                    "rho": float(rhos[k][i]),
                    "a1_fit": float(a1[i]) if not np.isnan(a1[i]) else "",
                    "theta_tv": tvs[k],
                }
            )
    if fmt == "csv":
        _emit({"columns": ["k", "gridpoint", "rho", "a1_fit", "theta_tv"], "rows": rows}, out, fmt)
    else:
        _emit(
            {
                "k": klist,
                "grid": [float(s) for s in s_grid],
                "rho": {str(k): [float(x) for x in rhos[k]] for k in klist},
                "a1_fit": [_clean(x) for x in a1],
                "theta_tv": {str(k): tvs[k] for k in klist},
                "positivity_certificate": metric.positivity_certificate,
            },
            out,
            fmt,
        )


@main.command("verify")
@click.option("--out", default=None)
@click.option("--only", default=None, help="comma-separated criterion numbers")
def cmd_verify(out, only):
    """Run the acceptance suite and print one pass/fail line per criterion."""
    numbers = [int(x) for x in only.split(",")] if only else None
    np.seterr(all="ignore")
    results = acc.run_all(numbers)
    table = acc.format_table(results)
    if out:
        with open(out, "w") as fh:
            fh.write(table + "\n")
    click.echo(table)
    hard_failures = [r for r in results if not r.passed and not r.expected_failure]
    if hard_failures:
        sys.exit(EXIT_INVARIANT)


if __name__ == "__main__":
    main()
