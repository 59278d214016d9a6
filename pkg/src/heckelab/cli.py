"""Command line front end: ``heckelab <subcommand> [options]``.

Every subcommand writes one table (CSV, or JSON with a summary) and exits 0 iff every row
passes. Complex values are written as (re, im) column pairs with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

EXIT_FAIL = 1
EXIT_CONFIG = 2

# defaults for the guarded budgets
MAX_NORM_BOUND = 1e7
MAX_NODES = 4096
MAX_BESSEL_RADIUS = 200.0


class UsageError(ValueError):
    pass


# ------------------------------------------------------------------ formatting

def fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def split_complex(prefix: str, v) -> dict:
    v = complex(v)
    return {f"{prefix}_re": v.real, f"{prefix}_im": v.imag}


def write_table(rows: list, args, command: str) -> str:
    ok = all(r.get("status", "PASS") == "PASS" for r in rows)
    if args.format == "json":
        payload = {"command": command, "rows": rows, "n_rows": len(rows), "all_pass": ok}
        text = json.dumps(payload, indent=2, sort_keys=False, default=float) + "\n"
    else:
        buf = io.StringIO()
        cols = []
        for r in rows:
            cols += [c for c in r if c not in cols]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([fmt(r.get(c, "")) for c in cols])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


# ------------------------------------------------------------------ argument parsing

def parse_s_list(text: str) -> list:
    out = []
    for tok in text.replace(";", ",").split(","):
        tok = tok.strip()
        if tok:
            out.append(complex(tok.replace("i", "j")) if "i" in tok or "j" in tok else complex(float(tok)))
    if not out:
        raise UsageError("empty --s list")
    return out


def parse_points(text: str, F) -> list:
    """Points of h_F^2 as per-place x+iy values; places separated by '/', points by ','.

    For F = Q a point is just a complex number (``i`` allowed); for F real quadratic
    ``0.1+1.2i/0.3+0.8i`` gives x_σ = Re, y_σ = Im at the two places; a complex place takes
    ``x_re+x_im*i@y``.
    """
    from .space import UHSPoint
    pts = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        xs, ys = [], []
        for part in tok.split("/"):
            part = part.strip()
            if "@" in part:
                xv, yv = part.split("@")
                xs.append(_cplx(xv))
                ys.append(float(yv))
            else:
                z = _cplx(part)
                xs.append(z.real)
                ys.append(z.imag)
        if len(xs) == 1:
            xs, ys = xs * F.num_places, ys * F.num_places
        if len(xs) != F.num_places:
            raise UsageError(f"point {tok!r} needs {F.num_places} place values")
        pts.append((tok, UHSPoint.from_coordinates(F, xs, ys)))
    if not pts:
        raise UsageError("empty --z list")
    return pts


def _cplx(t: str) -> complex:
    t = t.strip().replace(" ", "")
    if t in ("i", "+i"):
        return 1j
    if t == "-i":
        return -1j
    t = t.replace("i", "j")
    if t.endswith("+j") or t.endswith("-j"):
        t = t[:-1] + "1j"
    return complex(t)


def _guard(args):
    if args.norm_bound is not None and not 1 <= args.norm_bound <= MAX_NORM_BOUND:
        raise UsageError(f"--norm-bound must lie in [1, {MAX_NORM_BOUND:g}]")
    if args.nodes is not None and not (2 <= args.nodes <= MAX_NODES and args.nodes % 2 == 0):
        raise UsageError(f"--nodes must be an even integer in [2, {MAX_NODES}]")
    if args.bessel_radius is not None and not 1 <= args.bessel_radius <= MAX_BESSEL_RADIUS:
        raise UsageError(f"--bessel-radius must lie in [1, {MAX_BESSEL_RADIUS:g}]")


def _require_convergent(s_list):
    for s in s_list:
        if s.real <= 1:
            raise UsageError(f"s = {s} is outside Re s > 1 where the direct sums converge")


def _load_ext(path):
    from .config import load_extension
    return load_extension(path)


def _load_field(text):
    import os
    from .config import load_field, resolve_path
    from .numfield import field_from_spec
    try:
        resolve_path(text)
    except FileNotFoundError:
        if os.path.sep in text or text.endswith(".cfg"):
            raise
        return field_from_spec(text)
    return load_field(text)


def _field_label(F) -> str:
    return getattr(F, "name", "") or "F"


def _default_lattice(F):
    from .ideals import FractionalIdeal, OFLattice
    one = FractionalIdeal.unit(F)
    return OFLattice((one, one))


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# ------------------------------------------------------------------ subcommands

def cmd_verify_hecke(args) -> int:
    from .hecke import HeckeIntegralJob, verify_hecke
    from .ideals import class_group
    cfg = _load_ext(args.ext)
    s_list = parse_s_list(args.s or "2.0")
    _require_convergent(s_list)
    rows = []
    h = class_group(cfg.F).h
    classes = range(h) if args.cls is None else [args.cls]
    for s in s_list:
        for c in classes:
            kw = {}
            if args.nodes:
                kw["nodes"] = args.nodes
            if args.norm_bound:
                kw["X"] = args.norm_bound
            job = HeckeIntegralJob(cfg.ext, cfg.w, s, c, cfg.A, **kw)
            t0 = time.perf_counter()
            rep = verify_hecke(job, args.tolerance, cfg.name)
            row = rep.row()
            row["seconds"] = round(time.perf_counter() - t0, 3)
            rows.append(row)
    write_table(rows, args, "verify-hecke")
    return 0 if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def cmd_fourier_compare(args) -> int:
    from .eisenstein import (EisensteinSeries, anti_integral_rep, eisenstein_direct_err,
                             eisenstein_fourier_err)
    from .ideals import class_group
    F = _load_field(args.field or "Q")
    L = _default_lattice(F)
    s_list = parse_s_list(args.s or "1.3,1.8,2.5")
    _require_convergent(s_list)
    pts = parse_points(args.z or "i,0.3+1.7i", F)
    rows = []
    for c in range(class_group(F).h):
        ser = EisensteinSeries(L, anti_integral_rep(F, c), X=args.norm_bound or 1e4,
                               bessel_radius=args.bessel_radius or 30.0)
        for label, z in pts:
            for s in s_list:
                d, de = eisenstein_direct_err(ser, z, s)
                f, fe = eisenstein_fourier_err(ser, z, s)
                dev = abs(d - f)
                tol = args.tolerance if args.tolerance is not None else 1e-8
                row = {"field": _field_label(F), "class": c, "z": label}
                row.update(split_complex("s", s))
                row.update(split_complex("direct", d))
                row.update(split_complex("fourier", f))
                row.update({"deviation": dev, "direct_error": de, "fourier_error": fe,
                            "status": _status(dev <= max(de + fe, 0.0) or dev < tol * max(1, abs(d)))})
                rows.append(row)
    write_table(rows, args, "fourier-compare")
    return 0 if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def _eis_residue_rows(F, pts, args):
    from .eisenstein import EisensteinSeries, eisenstein_fourier, residue_closed_form
    from .ideals import class_group
    from .zeta import numeric_residue_and_constant
    L = _default_lattice(F)
    tol = args.tolerance if args.tolerance is not None else 1e-5
    rows = []
    for c in range(class_group(F).h):
        closed = residue_closed_form(L, c)
        ser = EisensteinSeries(L, cls=c, bessel_radius=args.bessel_radius or 30.0, l_mode="smooth-empirical")
        for label, z in pts:
            r, _, er, _ = numeric_residue_and_constant(lambda s: eisenstein_fourier(ser, z, s))
            rel = abs(r - closed) / abs(closed)
            row = {"kind": "eisenstein", "field": _field_label(F), "class": c, "z": label}
            row.update(split_complex("numeric", r))
            row.update({"closed_form": closed, "relative_deviation": rel, "numeric_error": er,
                        "status": _status(rel < tol)})
            rows.append(row)
    return rows


def _rel_residue_rows(cfg, args):
    from .arith import kappa
    from .eisenstein import zeta_full, zeta_partial
    from .ideals import class_group
    from .zeta import RelativeData, RelativeZetaJob, relative_zeta_residue
    E, F = cfg.E, cfg.F
    G = class_group(F)
    rel = RelativeData(cfg.ext, cfg.w, cfg.A)
    tol = args.tolerance if args.tolerance is not None else 1e-3
    rows = []
    for c in range(G.h):
        job = RelativeZetaJob(rel, c, int(args.norm_bound or 100000))
        r, er = relative_zeta_residue(job)
        closed = kappa(E) / class_group(E).h * zeta_partial(F, G.inverse(c), cfg.ext.n)[0] \
            / zeta_full(F, cfg.ext.n)[0]
        closed = float(np.real(closed))
        dev = abs(r - closed) / abs(closed)
        row = {"kind": "relative_zeta", "ext": cfg.name, "class": c}
        row.update(split_complex("numeric", r))
        row.update({"closed_form": closed, "relative_deviation": dev, "numeric_error": er,
                    "status": _status(dev < tol)})
        rows.append(row)
    return rows


def cmd_residue(args) -> int:
    rows = []
    if args.ext:
        rows += _rel_residue_rows(_load_ext(args.ext), args)
    if args.field or not args.ext:
        F = _load_field(args.field or "Q")
        rows += _eis_residue_rows(F, parse_points(args.z or "i,0.3+1.7i", F), args)
    write_table(rows, args, "residue")
    return 0 if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def cmd_limit(args) -> int:
    from .eisenstein import EisensteinSeries, eisenstein_fourier, kronecker_limit_closed_form
    from .ideals import class_group
    from .zeta import numeric_residue_and_constant
    rows = []
    tol = args.tolerance if args.tolerance is not None else 1e-5
    if args.ext:
        from .hecke import HeckeIntegralJob, relative_kronecker_limit
        from .zeta import RelativeZetaJob, relative_zeta_constant
        cfg = _load_ext(args.ext)
        if cfg.ext.n != 2:
            raise UsageError("the relative limit is implemented for [E:F] = 2")
        for c in range(class_group(cfg.F).h):
            job = HeckeIntegralJob(cfg.ext, cfg.w, 2.0, c, cfg.A, nodes=args.nodes or 32,
                                   zeta_X=int(args.norm_bound or 100000))
            kl = relative_kronecker_limit(job, args.bessel_radius or 30.0)
            num, en = relative_zeta_constant(RelativeZetaJob(job.rel, c, job.zeta_X))
            dev = abs(kl.value - num)
            row = {"kind": "relative_zeta", "ext": cfg.name, "class": c,
                   "diagnostic_only": cfg.F.d != 1}
            row.update(split_complex("closed", kl.value))
            row.update(split_complex("numeric", num))
            row.update({"deviation": dev, "closed_error": kl.error, "numeric_error": en,
                        "status": _status(dev < tol * max(1, abs(num)))})
            rows.append(row)
    if args.field or not args.ext:
        F = _load_field(args.field or "Q")
        L = _default_lattice(F)
        for c in range(class_group(F).h):
            ser = EisensteinSeries(L, cls=c, bessel_radius=args.bessel_radius or 30.0,
                                   l_mode="smooth-empirical")
            for label, z in parse_points(args.z or "i,0.3+1.7i", F):
                _, num, _, en = numeric_residue_and_constant(lambda s: eisenstein_fourier(ser, z, s))
                kl = kronecker_limit_closed_form(L, c, z, args.bessel_radius or 30.0)
                dev = abs(kl.value - num)
                row = {"kind": "eisenstein", "field": _field_label(F), "class": c, "z": label}
                row.update(split_complex("closed", kl.value))
                row.update(split_complex("numeric", num))
                row.update(split_complex("H_star", kl.H_star))
                row.update({"deviation": dev, "closed_error": kl.error, "numeric_error": en,
                            "status": _status(dev < tol * max(1, abs(num)))})
                rows.append(row)
    write_table(rows, args, "limit")
    return 0 if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def cmd_decompose_zeta(args) -> int:
    """Per-class ζ_{E/F,𝒜}(𝔄^{-1}, s) and their sum against ζ_E(𝔄^{-1}, s)."""
    from .ideals import class_group
    from .zeta import (PartialZetaJob, RelativeData, RelativeZetaJob, partial_zeta,
                       relative_partial_zeta)
    cfg = _load_ext(args.ext)
    s_list = parse_s_list(args.s or "2.0")
    _require_convergent(s_list)
    X = int(args.norm_bound or 100000)
    tol = args.tolerance if args.tolerance is not None else 1e-5
    rel = RelativeData(cfg.ext, cfg.w, cfg.A)
    h = class_group(cfg.F).h
    rows = []
    for s in s_list:
        row = {"ext": cfg.name}
        row.update(split_complex("s", s))
        total, terr = 0j, 0.0
        for c in range(h):
            v, e = relative_partial_zeta(RelativeZetaJob(rel, c, X), s)
            row.update(split_complex(f"class{c}", v))
            total += v
            terr += e
        zE, eE = partial_zeta(PartialZetaJob(cfg.E, cfg.A.inverse(), X), s)
        row.update(split_complex("sum", total))
        row.update(split_complex("zeta_E", zE))
        dev = abs(total - zE) / abs(zE)
        row.update({"relative_deviation": dev, "sum_error": terr, "zeta_E_error": eE,
                    "status": _status(dev < tol)})
        rows.append(row)
    write_table(rows, args, "decompose-zeta")
    return 0 if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def selftest_rows(fast: bool = True) -> list:
    """Arithmetic-function, d^×t, regulator and Bessel-ODE identity suites."""
    from .arith import ramanujan_partition_check
    from .config import bundled_configs, load_extension
    from .ideals import codifferent, enumerate_ideals, ideal_mul
    from .numfield import field_from_spec
    from .special import bessel_k, dtimes_identity_check
    from .units import regulator_lemma_check, relative_unit_group
    rows = []

    def add(suite, case, value, ok):
        rows.append({"suite": suite, "case": case, "residual": value, "status": _status(ok)})

    bound = 60 if fast else 500
    for name in ("Q", "Q(sqrt -5)"):
        k = field_from_spec(name)
        worst, count = 0.0, 0
        ideals = enumerate_ideals(k, X=bound)
        bs = [ideal_mul(c, codifferent(k)) for c in ideals[:4]]
        for m in ideals:
            for b in bs:
                try:
                    ramanujan_partition_check(m, b)
                except AssertionError:
                    worst = math.inf
                count += 1
        add("arith_func_lemma", f"{name} N<={bound} ({count} pairs)", worst, worst == 0.0)

    for nl in ((1, 1), (2, 2), (1, 1, 1)):
        lhs, rhs = dtimes_identity_check(nl, 1.5)
        r = abs(lhs - rhs) / abs(rhs)
        add("dtimes_identity", str(nl), r, r < 1e-8)

    for cfgname in bundled_configs():
        cfg = load_extension(cfgname)
        a, b = regulator_lemma_check(relative_unit_group(cfg.ext))
        r = abs(a - b) / abs(b)
        add("regulator_lemma", cfgname[:-4], r, r < 1e-8)

    # x^2 K'' + x K' - (x^2 + ν^2) K = 0 with K' = -(K_{ν-1} + K_{ν+1})/2 and
    # K'' = (K_{ν-2} + 2K_ν + K_{ν+2})/4, all evaluated by the trapezoid K
    for nu in (0.0, 0.5, 1.3, 2.5 + 1.0j):
        worst = 0.0
        xs = np.array([0.5, 2.0, 7.0, 15.0])
        K = {m: np.asarray(bessel_k(nu + m, xs), dtype=complex) for m in (-2, -1, 0, 1, 2)}
        d1 = -(K[-1] + K[1]) / 2
        d2 = (K[-2] + 2 * K[0] + K[2]) / 4
        res = xs ** 2 * d2 + xs * d1 - (xs ** 2 + nu * nu) * K[0]
        worst = float(np.max(np.abs(res) / (xs ** 2 * np.abs(K[0]))))
        add("bessel_ode", f"nu={nu}", worst, worst < 1e-10)
    return rows


def cmd_selftest(args) -> int:
    rows = selftest_rows(fast=not args.full)
    write_table(rows, args, "selftest")
    return 0 if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


# ------------------------------------------------------------------ entry point

COMMANDS = {
    "verify-hecke": cmd_verify_hecke,
    "fourier-compare": cmd_fourier_compare,
    "residue": cmd_residue,
    "limit": cmd_limit,
    "decompose-zeta": cmd_decompose_zeta,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heckelab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        q = sub.add_parser(name)
        q.add_argument("--ext", help="extension config (path or bundled name)")
        q.add_argument("--field", help="field config or shorthand such as 'Q' or 'Q(sqrt -5)'")
        q.add_argument("--s", help="comma separated list of s values")
        q.add_argument("--z", help="comma separated points (see parse_points)")
        q.add_argument("--class", dest="cls", type=int, help="restrict to one class of Cl_F")
        q.add_argument("--norm-bound", type=float, help="truncation X of the lattice and Dirichlet sums")
        q.add_argument("--bessel-radius", type=float, help="cutoff of the Fourier ν-sum")
        q.add_argument("--nodes", type=int, help="trapezoid nodes per torus direction")
        q.add_argument("--tolerance", type=float, help="relative tolerance for PASS")
        q.add_argument("--out", help="output file (default stdout)")
        q.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "selftest":
            q.add_argument("--full", action="store_true", help="N𝔪 <= 500 instead of the quick bound")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("verify-hecke", "decompose-zeta") and not args.ext:
        print(f"heckelab {args.command}: --ext is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _guard(args)
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"heckelab: config not found: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"heckelab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        from .config import ConfigError
        if isinstance(exc, ConfigError):
            print(f"heckelab: bad config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise


if __name__ == "__main__":
    sys.exit(main())
