#!/usr/bin/env python3
"""Regenerate the bundled field and extension data files.

Class numbers, fundamental units and torsion generators are classical (LMFDB labels noted
below); regulators come from closed forms, not from the stored units, so the loader's
regulator check is a genuine cross-check. Embeddings are computed with mpmath at 60 digits.

    python scripts/make_field_data.py            # writes src/nfsieve/data/...
"""

from __future__ import annotations

import json
from pathlib import Path

import mpmath
from mpmath import mp

mp.dps = 80
DIGITS = 60
OUT = Path(__file__).resolve().parents[1] / "src" / "nfsieve" / "data"

phi = (1 + mpmath.sqrt(5)) / 2
cbrt2 = mpmath.cbrt(2)

FIELDS = {
    # LMFDB 2.2.8.1
    "q_sqrt2": dict(
        name="Q(sqrt 2)", poly=[-2, 0, 1], basis=None, disc=8, units=[[1, 1]], h=1,
        reps=[[[1, 0], [0, 1]]], w=2, gen=[-1, 0], reg=mpmath.log(1 + mpmath.sqrt(2)),
    ),
    # LMFDB 2.2.5.1, theta = golden ratio
    "q_sqrt5": dict(
        name="Q(sqrt 5)", poly=[-1, -1, 1], basis=None, disc=5, units=[[0, 1]], h=1,
        reps=[[[1, 0], [0, 1]]], w=2, gen=[-1, 0], reg=mpmath.log(phi),
    ),
    # same field as q_sqrt5 but defined by x^2 - 5: index 2, bad prime 2 tabulated
    "q_sqrt5_x2m5": dict(
        name="Q(sqrt 5) via x^2-5", poly=[-5, 0, 1], basis=[["1", "0"], ["1/2", "1/2"]], disc=5,
        units=[[0, 1]], h=1, reps=[[[1, 0], [0, 1]]], w=2, gen=[-1, 0], reg=mpmath.log(phi),
        index_primes={"2": [{"generators": [[2, 0], [0, 2]], "e": 1, "f": 2}]},
    ),
    # LMFDB 2.0.4.1
    "q_i": dict(
        name="Q(i)", poly=[1, 0, 1], basis=None, disc=-4, units=[], h=1,
        reps=[[[1, 0], [0, 1]]], w=4, gen=[0, 1], reg=mpmath.mpf(1), conj=[0, -1],
    ),
    # LMFDB 2.0.20.1, class group C2, nontrivial class represented by (2, 1 + sqrt(-5))
    "q_sqrt_m5": dict(
        name="Q(sqrt -5)", poly=[5, 0, 1], basis=None, disc=-20, units=[], h=2,
        reps=[[[1, 0], [0, 1]], [[2, 0], [1, 1]]], w=2, gen=[-1, 0], reg=mpmath.mpf(1), conj=[0, -1],
    ),
    # LMFDB 4.0.125.1 = Q(zeta_5); unit zeta + zeta^-1 = -1 - theta^2 - theta^3, Reg = 2 log(phi)
    "q_zeta5": dict(
        name="Q(zeta 5)", poly=[1, 1, 1, 1, 1], basis=None, disc=125, units=[[-1, 0, -1, -1]], h=1,
        reps=[[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]], w=10, gen=[0, -1, 0, 0],
        reg=2 * mpmath.log(phi), conj=[-1, -1, -1, -1],
    ),
    # LMFDB 3.1.108.1 = Q(cbrt 2); unit cbrt2 - 1, Reg = log(1 + cbrt2 + cbrt4)
    "cubic_x3m2": dict(
        name="Q(cbrt 2)", poly=[-2, 0, 0, 1], basis=None, disc=-108, units=[[-1, 1, 0]], h=1,
        reps=[[[1, 0, 0], [0, 1, 0], [0, 0, 1]]], w=2, gen=[-1, 0, 0],
        reg=mpmath.log(1 + cbrt2 + cbrt2**2),
    ),
}


def ordered_roots(poly):
    roots = mpmath.polyroots(list(reversed(poly)), maxsteps=200, extraprec=200)
    real = sorted([z for z in roots if abs(mpmath.im(z)) < mpmath.mpf(10) ** -40], key=lambda z: -mpmath.re(z))
    upper = sorted([z for z in roots if mpmath.im(z) > mpmath.mpf(10) ** -40], key=lambda z: -mpmath.re(z))
    return [mpmath.mpc(mpmath.re(z), 0) for z in real] + upper + [mpmath.conj(z) for z in upper]


def eval_basis(coords, basis, z):
    n = len(coords)
    if basis is None:
        return sum(c * z**k for k, c in enumerate(coords))
    tot = 0
    for c, row in zip(coords, basis):
        tot += c * sum(mpmath.mpf(mpmath.fraction(*map(int, (s.split("/") + ["1"])[:2]))) * z**k for k, s in enumerate(row))
    return tot


def build(key, d):
    n = len(d["poly"]) - 1
    roots = ordered_roots(d["poly"])
    r1 = sum(1 for z in roots if mpmath.im(z) == 0)
    r2 = (n - r1) // 2
    basis = d["basis"] or [["1" if i == k else "0" for k in range(n)] for i in range(n)]
    bounds = []
    for u in d["units"]:
        vals = [abs(eval_basis(u, d["basis"], z)) for z in roots]
        bounds.append(int(mpmath.ceil(max(vals))))
    kappa = mpmath.mpf(2) ** r1 * (2 * mpmath.pi) ** r2 * d["reg"] * d["h"] / (d["w"] * mpmath.sqrt(abs(d["disc"])))
    doc = {
        "format": "nfsieve-field",
        "version": 1,
        "name": d["name"],
        "defining_poly": [str(c) for c in d["poly"]],
        "integral_basis": basis,
        "signature": [r1, r2],
        "precision_bits": 128,
        "embeddings": [{"re": mpmath.nstr(mpmath.re(z), DIGITS), "im": mpmath.nstr(mpmath.im(z), DIGITS)} for z in roots],
        "disc": str(d["disc"]),
        "fundamental_units": [[str(c) for c in u] for u in d["units"]],
        "unit_bounds": bounds,
        "regulator": mpmath.nstr(d["reg"], DIGITS),
        "class_number": d["h"],
        "class_reps": [[[str(c) for c in row] for row in rep] for rep in d["reps"]],
        "residue": mpmath.nstr(kappa, DIGITS),
        "torsion": {"order": d["w"], "generator": [str(c) for c in d["gen"]]},
        "index_primes": d.get("index_primes", {}),
        "complex_conjugation": None if d.get("conj") is None else [str(c) for c in d["conj"]],
    }
    (OUT / "fields").mkdir(parents=True, exist_ok=True)
    (OUT / "fields" / f"{key}.field").write_text(json.dumps(doc, indent=1) + "\n")
    print(key, "r1 r2 =", r1, r2, "m =", bounds, "kappa =", mpmath.nstr(kappa, 12))


# ---------------------------------------------------------------------- extensions
# Automorphisms are images of theta in the power basis of L. Reciprocity tables come from the
# classical laws: Frob(p) = (zeta -> zeta^{N p}) for cyclotomic L, and Frob(p) trivial iff p is
# principal for the Hilbert class field; each law is evaluated at one prime per narrow class.

ZETA5 = {"s1": [0, 1, 0, 0], "s2": [0, 0, 1, 0], "s3": [0, 0, 0, 1], "s4": [-1, -1, -1, -1]}

EXTENSIONS = {
    "zeta5_over_sqrt5": dict(
        name="Q(zeta 5)/Q(sqrt 5), C = complex conjugation", L_poly=[1, 1, 1, 1, 1], autos=ZETA5,
        classes=[["s1"], ["s2"], ["s3"], ["s4"]], H=["s1", "s4"], C=["s4"], K="q_sqrt5", LK=2,
        conductor_gen=[-1, 2], law=("cyclotomic", 5),
    ),
    "zeta5_frob2": dict(
        name="Q(zeta 5)/Q, C = (zeta -> zeta^2)", L_poly=[1, 1, 1, 1, 1], autos=ZETA5,
        classes=[["s1"], ["s2"], ["s3"], ["s4"]], H=["s1", "s2", "s3", "s4"], C=["s2"], K=None, LK=4,
    ),
    "qi_split": dict(
        name="Q(i)/Q(i), C = identity", L_poly=[1, 0, 1], autos={"s1": [0, 1], "s3": [0, -1]},
        classes=[["s1"], ["s3"]], H=["s1"], C=["s1"], K="q_i", LK=1, conductor_gen=[1, 0], law=("trivial",),
    ),
    # L = Q(i, sqrt 5) = Q(theta), theta = i phi, root of x^4 + 3x^2 + 1; Hilbert class field of Q(sqrt -5)
    "hilbert_sqrt_m5": dict(
        name="Q(i, sqrt 5)/Q(sqrt -5), C = nontrivial", L_poly=[1, 0, 3, 0, 1],
        autos={"e": [0, 1, 0, 0], "s": [0, -1, 0, 0], "t": [0, -3, 0, -1], "st": [0, 3, 0, 1]},
        classes=[["e"], ["s"], ["t"], ["st"]], H=["e", "st"], C=["st"], K="q_sqrt_m5", LK=2,
        conductor_gen=[1, 0], law=("hilbert", "e", "st"),
    ),
}


def build_extension(key, d):
    import sys

    sys.path.insert(0, str(OUT.parents[1]))
    from nfsieve.field_data import load_field
    from nfsieve.nf_arith import NfIdeal
    from nfsieve.ray_class import build_group_data, class_labels, prime_class_partition

    doc = {
        "format": "nfsieve-extension",
        "version": 1,
        "name": d["name"],
        "L_poly": [str(c) for c in d["L_poly"]],
        "automorphisms": {k: [str(c) for c in v] for k, v in d["autos"].items()},
        "conjugacy_classes": d["classes"],
        "H": d["H"],
        "C": d["C"],
        "K": d["K"],
        "LK_degree": d["LK"],
    }
    if d["K"] is not None:
        K = load_field(d["K"])
        f = NfIdeal.principal(K, d["conductor_gen"])
        data = build_group_data(K, f)
        part = prime_class_partition(K, f, 500)
        table = []
        for lab in class_labels(data):
            P = part[lab][0]
            law = d["law"]
            if law[0] == "cyclotomic":
                elem = f"s{P.norm % law[1]}"
            elif law[0] == "hilbert":
                elem = law[1] if lab[0] == 0 else law[2]
            else:
                elem = d["H"][0]
            table.append({"class": lab[0], "residue": [str(v) for v in lab[1].residue],
                          "signs": list(lab[1].signs), "element": elem})
        doc["conductor"] = [[str(v) for v in row] for row in f.hnf]
        doc["reciprocity"] = table
    (OUT / "extensions").mkdir(parents=True, exist_ok=True)
    (OUT / "extensions" / f"{key}.ext").write_text(json.dumps(doc, indent=1) + "\n")
    print(key, "written")


if __name__ == "__main__":
    for key, d in FIELDS.items():
        build(key, d)
    for key, d in EXTENSIONS.items():
        build_extension(key, d)
