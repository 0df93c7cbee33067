"""Command-line front end: ``nfsieve <command> ...``.

Exit codes: 0 all certificates pass, 1 a certificate failed (failing rows go to stderr as CSV),
2 usage error or missing file, 3 the input data failed validation.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from .errors import NfSieveError, ParseError, ValidationError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rows_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n", restval="")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, rows: list[dict], ok_key: str = "pass") -> int:
    text = _rows_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if str(r.get(ok_key)) not in ("True", "vacuous", "unchecked", "pass")]
    if bad:
        sys.stderr.write(_rows_csv(bad))
        return EXIT_FAIL
    return EXIT_OK


def parse_tau(s: str) -> mpmath.mpf:
    s = s.strip()
    if "^" in s:
        b, e = s.split("^", 1)
        return mpmath.mpf(int(b)) ** int(e)
    return mpmath.mpf(s)


def parse_ideal(F, spec: str):
    """'3' -> (3); '2;1,1' -> (2, 1 + w_1): generators split by ';', coordinates by ','."""
    from .nf_arith import NfIdeal

    gens = []
    for g in spec.split(";"):
        parts = [int(v) for v in g.split(",") if v.strip()]
        if len(parts) == 1:
            gens.append(F.scale(F.one(), parts[0]))
        elif len(parts) == F.n:
            gens.append(tuple(parts))
        else:
            raise UsageError(f"generator '{g}' needs 1 or {F.n} integers")
    if all(not any(g) for g in gens):
        raise UsageError("the zero ideal is not allowed")
    return NfIdeal.from_generators(F, [g for g in gens if any(g)])


def parse_elem(F, spec: str):
    parts = [int(v) for v in spec.split(",")]
    if len(parts) == 1:
        return F.scale(F.one(), parts[0])
    if len(parts) != F.n:
        raise UsageError(f"element '{spec}' needs 1 or {F.n} integers")
    return tuple(parts)


def parse_eta(F, spec: str):
    if spec in ("all", ""):
        return None
    if len(spec) != F.r1 or set(spec) - {"+", "-"}:
        raise UsageError(f"--eta needs {F.r1} characters from '+-'")
    return tuple(1 if c == "+" else -1 for c in spec)


def _load(args):
    from .field_data import load_field

    return load_field(args.field, args.precision)


def _guard(args, x) -> None:
    if x > args.limit:
        raise UsageError(f"x = {x} exceeds --limit {args.limit}")


# ---------------------------------------------------------------------- commands


def cmd_validate_field(args) -> int:
    from .field_data import validate_field

    F = _load(args)
    validate_field(F, check_classes=True)
    rows = [{
        "field": F.name, "degree": F.n, "r1": F.r1, "r2": F.r2, "disc": F.disc,
        "regulator": mpmath.nstr(F.regulator, 20), "class_number": F.class_number,
        "residue": mpmath.nstr(F.residue, 20), "pass": True,
    }]
    return _emit(args, rows)


def cmd_reduce_units(args) -> int:
    from .field_data import choose_reduced_units, dumps_field, validate_field

    F = _load(args)
    G = choose_reduced_units(F, args.window)
    validate_field(G, check_classes=False)
    if args.write_field:
        Path(args.write_field).write_text(dumps_field(G))
    rows = [
        {"field": F.name, "j": j, "before": " ".join(map(str, u)), "after": " ".join(map(str, v)),
         "m_before": mb, "m_after": ma, "pass": True}
        for j, (u, v, mb, ma) in enumerate(zip(F.fundamental_units, G.fundamental_units, F.unit_bounds, G.unit_bounds))
    ]
    return _emit(args, rows)


def cmd_count_domain(args) -> int:
    from .lattice_count import theorem3_certificate

    F = _load(args)
    a = parse_ideal(F, args.a)
    f = parse_ideal(F, args.f)
    fe = parse_elem(F, args.f_elem)
    eta = parse_eta(F, args.eta)
    rows = []
    for t in args.t:
        _guard(args, t**F.n)
        c = theorem3_certificate(F, a, f, fe, eta, Fraction(str(t)), args.tau_mem)
        rows.append(c.row())
    return _emit(args, rows)


def cmd_census(args) -> int:
    from .ideal_census import census

    F = _load(args)
    rows = []
    for x in args.x:
        _guard(args, x)
        rows.extend(census(F, x).rows())
    return _emit(args, rows)


def cmd_ray_class(args) -> int:
    from .ray_class import build_group_data, class_labels, prime_class_partition

    F = _load(args)
    f = parse_ideal(F, args.f)
    data = build_group_data(F, f)
    part = prime_class_partition(F, f, args.x)
    labels = class_labels(data)
    populated = sum(1 for lab in labels if part.get(lab))
    ok = data.h_star == data.h_star_enumerated and data.splitting * F.class_number == data.h_star
    ok = ok and set(part) <= set(labels) and (populated == data.h_star or populated < data.h_star)
    rows = [{
        "field": F.name, "f_norm": f.norm, "phi_f": data.phi_f, "rho_V": len(data.rho_V),
        "h_star": data.h_star, "h_star_cosets": data.h_star_enumerated, "splitting": str(data.splitting),
        "prime_classes": len(part), "x": args.x, "pass": ok,
    }]
    for i, lab in enumerate(labels):
        rows.append({
            "field": F.name, "class": lab[0], "residue": " ".join(map(str, lab[1].residue)),
            "signs": "".join("+" if s > 0 else "-" for s in lab[1].signs), "primes": len(part.get(lab, [])),
            "pass": ok,
        })
    return _emit(args, rows)


def cmd_sieve(args) -> int:
    from .minkowski import as_fraction
    from .nf_arith import factor_ideal, ideals_of_norm_up_to
    from .selberg_sieve import SieveConfig, diagonal_identity, exact_error_sum, lemma8_error_bound, selberg_upper_bound

    F = _load(args)
    _guard(args, args.x)
    f = parse_ideal(F, args.f)
    bad = {P for P, _ in factor_ideal(f)} if not f.is_unit_ideal() else set()
    with mpmath.workprec(F.precision):
        X = as_fraction(F.residue * args.x)
    A = list(ideals_of_norm_up_to(F, args.x))
    rows = []
    for z in args.z:
        cfg = SieveConfig(F, A, z, X, P=lambda P: P not in bad)
        res = selberg_upper_bound(cfg)
        diag = diagonal_identity(res.lam, cfg.density) == 1 / res.G_z
        row = {
            "field": F.name, "x": args.x, "z": z, "size_A": len(A), "sifted": res.sifted_exact,
            "G_z": f"{float(res.G_z):.12g}", "X_over_G": f"{float(res.X_over_G):.12g}",
            "sigma2": f"{float(res.sigma2):.12g}", "error_sum": f"{float(res.error_sum):.12g}",
            "upper_bound": f"{float(res.upper_bound):.12g}", "diagonal_identity": diag,
        }
        ok = res.chain_ok and res.lambda_ok and diag
        if z >= 16:
            ex, bd = exact_error_sum(F, z, cfg.P), lemma8_error_bound(F.n, z)
            row["lemma8_exact"] = mpmath.nstr(ex, 12)
            row["log10_lemma8_bound"] = f"{float(mpmath.log10(bd)):.6f}"
            ok = ok and ex <= bd
        row["pass"] = ok
        rows.append(row)
    return _emit(args, rows)


def cmd_bt_bound(args) -> int:
    from .bt_bound import actual_pi_C, bt_upper_bound, load_extension, proposition11_certificate

    E = load_extension(args.extension, args.precision)
    rows = []
    if E.K is None:
        # no fixed field recorded: only the Frobenius count is available
        for x in args.x:
            _guard(args, x)
            rows.append({"extension": E.name, "x": int(x), "actual_pi_C": actual_pi_C(E, int(x)), "pass": "vacuous"})
        return _emit(args, rows)
    for x in args.x:
        rep = bt_upper_bound(E, x, with_actual=x <= args.limit)
        row = rep.row()
        row["pass"] = rep.status
        rows.append(row)
        if E.K is not None and x <= min(args.limit, args.chain_limit):
            ch = proposition11_certificate(E, int(x), args.z)
            crow = ch.row()
            crow["pass"] = ch.passed
            rows.append(crow)
    return _emit(args, rows)


def cmd_verify_all(args) -> int:
    from .bt_bound import actual_pi_C, frobenius_counts, load_extension, proposition11_certificate
    from .field_data import DATA_DIR, load_field, validate_field
    from .ideal_census import census
    from .lattice_count import theorem3_certificate
    from .nf_arith import NfIdeal, unit_residues_mod
    from .ray_class import build_group_data

    rng = np.random.default_rng(args.seed)
    rows = []

    def record(stage, item, ok, detail=""):
        rows.append({"stage": stage, "item": item, "detail": detail, "pass": bool(ok)})

    fields = sorted(p.stem for p in (DATA_DIR / "fields").glob("*.field"))
    for name in fields:
        F = load_field(name, args.precision)
        try:
            validate_field(F)
            record("validate-field", name, True)
        except ValidationError as exc:
            record("validate-field", name, False, str(exc))
            continue
        rep = census(F, min(args.limit, 1000))
        record("census", name, rep.passed, f"total={rep.total}")
        f = NfIdeal.principal(F, F.scale(F.one(), 3))
        units = unit_residues_mod(f)
        for _ in range(2):
            fe = units[int(rng.integers(len(units)))]
            t = float(rng.uniform(2, 10 ** (3 / F.n)))
            eta = tuple(int(s) for s in rng.choice([-1, 1], F.r1)) if F.r1 else None
            c = theorem3_certificate(F, NfIdeal.unit_ideal(F), f, fe, eta, Fraction(t).limit_denominator(1000), args.tau_mem)
            record("count-domain", name, c.passed, f"t={c.t:.6g} exact={c.exact_lo}")
        d = build_group_data(F, f)
        record("ray-class", name, d.h_star == d.h_star_enumerated, f"h*={d.h_star}")
    ext_dir = DATA_DIR / "extensions"
    for p in sorted(ext_dir.glob("*.ext")):
        E = load_extension(p, args.precision)
        # Frobenius classes agree with the cycle types of L_poly mod p (else ValidationError)
        counts = frobenius_counts(E, 1000)
        pc = sum(counts[c] for c in E.classes if set(c) <= set(E.C))
        record("pi_C", p.stem, pc == actual_pi_C(E, 1000), f"pi_C(1000)={pc}")
        if E.K is not None:
            ch = proposition11_certificate(E, min(args.limit, 2000), 12)
            record("chain", p.stem, ch.passed)
    return _emit(args, rows)


# ---------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nfsieve", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=128, help="working precision in bits")
    common.add_argument("--tau-mem", type=parse_tau, default=mpmath.mpf(2) ** -80, help="membership tolerance, e.g. 2^-80")
    common.add_argument("--out", help="write the CSV here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--limit", type=int, default=10**6, help="largest x accepted (desk-scale guard)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-field", parents=[common], help="load and check a field file")
    p.add_argument("field")
    p.set_defaults(func=cmd_validate_field)

    p = sub.add_parser("reduce-units", parents=[common], help="pick fundamental units with small bounds")
    p.add_argument("field")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--write-field", help="write the field with the reduced units")
    p.set_defaults(func=cmd_reduce_units)

    p = sub.add_parser("count-domain", parents=[common], help="lattice-count certificates in the fundamental domain")
    p.add_argument("field")
    p.add_argument("--a", default="1", help="ideal generators, e.g. '2;1,1'")
    p.add_argument("--f", default="1", help="modulus generators")
    p.add_argument("--f-elem", default="1", help="residue class mod f")
    p.add_argument("--eta", default="all", help="signs at the real places, e.g. '+-', or 'all'")
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_count_domain)

    p = sub.add_parser("census", parents=[common], help="ideal counts against the explicit constants")
    p.add_argument("field")
    p.add_argument("--x", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("ray-class", parents=[common], help="narrow class group modulo f")
    p.add_argument("field")
    p.add_argument("--f", required=True)
    p.add_argument("--x", type=int, default=1000, help="prime ideals up to this norm are classified")
    p.set_defaults(func=cmd_ray_class)

    p = sub.add_parser("sieve", parents=[common], help="Selberg sieve on ideals of bounded norm")
    p.add_argument("field")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--z", type=float, nargs="+", required=True)
    p.add_argument("--f", default="1", help="primes dividing f are not sifted")
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("bt-bound", parents=[common], help="Brun-Titchmarsh bound and the live proof chain")
    p.add_argument("extension")
    p.add_argument("--x", type=float, nargs="+", required=True)
    p.add_argument("--z", type=float, default=12)
    p.add_argument("--chain-limit", type=int, default=10**4)
    p.set_defaults(func=cmd_bt_bound)

    p = sub.add_parser("verify-all", parents=[common], help="run the bundled property suite")
    p.set_defaults(func=cmd_verify_all)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, FileNotFoundError) as exc:
        sys.stderr.write(f"nfsieve: {exc}\n")
        return EXIT_USAGE
    except (ParseError, ValidationError) as exc:
        sys.stderr.write(f"nfsieve: invalid data: {exc}\n")
        return EXIT_DATA
    except NfSieveError as exc:
        sys.stderr.write(f"nfsieve: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
