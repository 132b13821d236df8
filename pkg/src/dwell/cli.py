"""
``dw``: command-line front end.

Every subcommand prints one JSON document (schema ``dw/1``) on stdout.
Exit status: 0 success, 1 usage or input error, 2 numerical failure (a
JSON diagnostic goes to stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import analysis, instanton, model, pt, reference, varopt
from .model import DEFAULT_PRECISION, EVEN, ODD, DomainError, NumericalError, TrialParams, context
from .trial import TrialFunction

SCHEMA = "dw/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _num(ctx, v, digits):
    return model.fmt(ctx, v, digits)


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------
def _add_coupling(p):
    p.add_argument("--a", type=float, help="coupling of -d2/dx2 + a x^2 + 2 x^4")
    p.add_argument("--m2", type=float, help="mass term of -d2/dx2 + m2 x^2 + g x^4 (with --g)")
    p.add_argument("--g", type=float, help="quartic coupling (with --m2)")


def _add_params(p, required=False):
    p.add_argument("--A", type=float, help="trial parameter A")
    p.add_argument("--D", type=float, help="trial parameter D")
    p.add_argument("--alpha", type=float, help="trial parameter alpha")
    p.add_argument("--published", action="store_true", help="use the tabulated parameter set for (a, parity)")


def _add_common(p):
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="mantissa bits (default %(default)s)")


def _coupling(args):
    has_a = args.a is not None
    has_pair = args.m2 is not None or args.g is not None
    if has_a == has_pair:
        raise UsageError("give exactly one of --a or the pair --m2/--g")
    if has_a:
        return args.a, None
    if args.m2 is None or args.g is None:
        raise UsageError("--m2 and --g must be given together")
    a, scale = model.symanzik_rescale(args.m2, args.g)
    return a, scale


def _params(args, a, parity, *, allow_none=True):
    if getattr(args, "published", False):
        key = (float(a), parity)
        if key not in model.PUBLISHED_PARAMS:
            raise UsageError(f"no tabulated parameters for a={a}, parity={parity}")
        return model.PUBLISHED_PARAMS[key]
    given = [args.A, args.D, args.alpha]
    if all(v is None for v in given):
        if allow_none:
            return None
        raise UsageError("trial parameters --A --D --alpha (or --published) are required")
    if any(v is None for v in given):
        raise UsageError("--A, --D and --alpha must be given together")
    return TrialParams(args.A, args.D, args.alpha, parity)


def _triple(text, parity):
    try:
        A, D, alpha = (float(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"expected A,D,alpha, got {text!r}") from None
    return TrialParams(A, D, alpha, parity)


def _header(a, scale, bits):
    out = {"schema": SCHEMA, "a": a, "precision_bits": bits}
    if scale is not None:
        out["energy_scale"] = repr(scale)
    return out


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------
def cmd_energy(args):
    a, scale = _coupling(args)
    bits = args.precision
    params = _params(args, a, args.parity)
    opt = None
    if params is None:
        opt = varopt.optimize_trial(a, args.parity, precision_bits=bits)
        params = opt.best
    tf = TrialFunction(params, a, bits)
    grid = pt.trial_grid(tf)
    ev, err = pt.rayleigh_energy(tf, grid, with_error=True)
    state = pt.pt_series(tf, args.K, grid)
    ctx = context(bits)
    digits = model.decimal_digits(bits) - 8
    out = _header(a, scale, bits)
    out.update(state.to_json(digits))
    out["E_var"] = _num(ctx, ev, digits)
    out["err_est"] = model.fmt(ctx, err, 3)
    for k, e in enumerate(state.energies, start=1):
        out[f"E{k}"] = _num(ctx, e, digits)
    if opt is not None:
        out["optimized"] = opt.to_json()
    return out


def cmd_optimize(args):
    a, scale = _coupling(args)
    seed = _params(args, a, args.parity)
    res = varopt.optimize_trial(a, args.parity, seed, args.tol, precision_bits=args.precision)
    out = _header(a, scale, args.precision)
    out.update(res.to_json())
    return out


def cmd_gap(args):
    a, scale = _coupling(args)
    even = _triple(args.even, EVEN) if args.even else None
    odd = _triple(args.odd, ODD) if args.odd else None
    if args.published:
        even = even or model.PUBLISHED_PARAMS.get((float(a), EVEN))
        odd = odd or model.PUBLISHED_PARAMS.get((float(a), ODD))
    rep = analysis.gap(a, args.K, args.mode, even=even, odd=odd, bits=args.precision)
    out = _header(a, scale, args.precision)
    out.update(rep.to_json())
    return out


def cmd_critical(args):
    res = analysis.critical_a(args.tol, mode=args.mode, bracket=tuple(args.bracket), bits=args.precision)
    out = {"schema": SCHEMA, "precision_bits": args.precision}
    out.update(res.to_json())
    return out


def cmd_instanton(args):
    a, scale = _coupling(args)
    series = instanton.gap_series(a, args.precision)
    ctx = context(args.precision)
    ref = ctx.mpf(args.reference_gap) if args.reference_gap is not None else None
    out = _header(a, scale, args.precision)
    out["order"] = args.order
    out["value"] = model.fmt(ctx, series.partial_sums[args.order], 15)
    out.update(series.to_json(ref))
    return out


def cmd_reference(args):
    a, scale = _coupling(args)
    sol = reference.reference_eigen(a, args.parity, args.level, bits=args.precision)
    out = _header(a, scale, args.precision)
    out.update(sol.to_json())
    if args.out:
        with open(args.out, "w", newline="") as fh:
            sol.to_csv(fh)
        out["csv"] = args.out
    return out


def cmd_curves(args):
    a, scale = _coupling(args)
    params = _params(args, a, args.parity, allow_none=False)
    table, state = analysis.curves(a, params, args.K, x_plot=args.x_plot, step=args.step, bits=args.precision)
    texts = analysis.curves_csv(table)
    out = _header(a, scale, args.precision)
    files = {}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, text in texts.items():
            path = os.path.join(args.out, f"{name}.csv")
            with open(path, "w", newline="") as fh:
                fh.write(text)
            files[name] = path
    out["files"] = files
    out["x_plot"] = args.x_plot
    out["diagnostics"] = state.to_json()["diagnostics"]
    return out


def cmd_deviation(args):
    a, scale = _coupling(args)
    params = _params(args, a, args.parity, allow_none=False)
    tf = TrialFunction(params, a, args.precision)
    sol = reference.reference_eigen(a, args.parity, bits=args.precision)
    delta, where = reference.wavefunction_deviation(tf, sol, cutoff=args.cutoff)
    ctx = context(args.precision)
    out = _header(a, scale, args.precision)
    out.update({"delta": model.fmt(ctx, delta, 8), "at_x": ctx.nstr(where, 8) if where is not None else None,
                "cutoff": args.cutoff})
    return out


def cmd_rescale(args):
    a, scale = model.symanzik_rescale(args.m2, args.g)
    return {"schema": SCHEMA, "m2": args.m2, "g": args.g, "a": a, "scale": scale}


# --------------------------------------------------------------------------
def build_parser():
    p = _Parser(prog="dw", description="Quartic oscillator / double-well energies and corrections.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("energy", help="variational energy and perturbation series")
    _add_coupling(s); _add_params(s); _add_common(s)
    s.add_argument("--parity", choices=(EVEN, ODD), default=EVEN)
    s.add_argument("--K", type=int, default=pt.DEFAULT_ORDER, help="number of corrections (default %(default)s)")
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("optimize", help="minimize the variational energy over A, D, alpha")
    _add_coupling(s); _add_params(s); _add_common(s)
    s.add_argument("--parity", choices=(EVEN, ODD), default=EVEN)
    s.add_argument("--tol", type=float, default=1e-7, help="relative simplex size (default %(default)s)")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("gap", help="splitting between the lowest odd and even levels")
    _add_coupling(s); _add_common(s)
    s.add_argument("--K", type=int, default=1)
    s.add_argument("--mode", choices=("pt", "reference"), default="pt")
    s.add_argument("--even", help="A,D,alpha for the even state (optimized if absent)")
    s.add_argument("--odd", help="A,D,alpha for the odd state (optimized if absent)")
    s.add_argument("--published", action="store_true", help="fill missing sets from the tabulated parameters")
    s.set_defaults(func=cmd_gap)

    s = sub.add_parser("critical", help="coupling where the ground-state energy vanishes")
    _add_common(s)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--mode", choices=("reference", "pt"), default="reference")
    s.add_argument("--bracket", type=float, nargs=2, default=(-5.0, -2.0), metavar=("LO", "HI"))
    s.set_defaults(func=cmd_critical)

    s = sub.add_parser("instanton", help="asymptotic splitting series")
    _add_coupling(s); _add_common(s)
    s.add_argument("--order", type=int, choices=range(instanton.MAX_ORDER + 1), default=instanton.MAX_ORDER)
    s.add_argument("--reference-gap", type=float, help="gap to report relative deviations against")
    s.set_defaults(func=cmd_instanton)

    s = sub.add_parser("reference", help="shooting eigenvalue solver")
    _add_coupling(s); _add_common(s)
    s.add_argument("--parity", choices=(EVEN, ODD), default=EVEN)
    s.add_argument("--level", type=int, default=0)
    s.add_argument("--out", help="write the eigenfunction as CSV (x,value)")
    s.set_defaults(func=cmd_reference)

    s = sub.add_parser("curves", help="tables of y0 and the corrections y_k")
    _add_coupling(s); _add_params(s); _add_common(s)
    s.add_argument("--parity", choices=(EVEN, ODD), default=EVEN)
    s.add_argument("--K", type=int, default=1)
    s.add_argument("--x-plot", type=float, default=analysis.X_PLOT)
    s.add_argument("--step", type=float, default=0.05)
    s.add_argument("--out", help="directory for y0.csv, y1.csv, ...")
    s.set_defaults(func=cmd_curves)

    s = sub.add_parser("deviation", help="pointwise deviation of a trial function from the exact state")
    _add_coupling(s); _add_params(s); _add_common(s)
    s.add_argument("--parity", choices=(EVEN, ODD), default=EVEN)
    s.add_argument("--cutoff", type=float, default=1e-20)
    s.set_defaults(func=cmd_deviation)

    s = sub.add_parser("rescale", help="map (m2, g) to the one-parameter coupling a")
    s.add_argument("--m2", type=float, required=True)
    s.add_argument("--g", type=float, required=True)
    s.set_defaults(func=cmd_rescale)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except (UsageError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(json.dumps({"schema": SCHEMA, "error": "usage", "message": str(exc)}), file=sys.stderr)
        return 1
    except (NumericalError, ArithmeticError) as exc:
        diag = {"schema": SCHEMA, "error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "x", None) is not None:
            diag["x"] = exc.x
        print(json.dumps(diag), file=sys.stderr)
        return 2
    json.dump(out, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
