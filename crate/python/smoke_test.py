#!/usr/bin/env python3
"""Smoke test for the betamap_py extension module.

Build and stage the module first (or use run_smoke.sh):

    cargo build --release -p betamap-py
    cp target/release/libbetamap_py.so python/betamap_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import betamap_py as bm


def check(name, ok, detail=""):
    mark = "ok" if ok else "FAIL"
    print(f"  {name}: {mark} {detail}")
    if not ok:
        raise SystemExit(f"smoke test failed at {name}")


def main():
    print("betamap_py smoke test")

    # golden ratio as a polynomial root: x^2 - x - 1 on (1, 2)
    phi = bm.Beta(poly=[1, -1, -1], lo=1.0, hi=2.0)
    check("golden value", abs(phi.value - (1 + math.sqrt(5)) / 2) < 1e-14)
    check("golden digits", phi.digits_of_one(6) == [1, 1, 0, 0, 0, 0])
    check("golden quasi digits", phi.quasi_digits_of_one(6) == [1, 0, 1, 0, 1, 0])
    check("golden simple index", phi.simple_index() == 2)
    spec = bm.spectrum(phi)
    check("golden spectrum clean", len(spec) == 1 and spec[0]["leading"])

    # quartic base with one real non-leading eigenvalue
    b = bm.Beta(poly=[1, -3, -2, 0, -3], lo=3.0, hi=4.0)
    check("quartic digits", bm.greedy_digits(b, 1.0, 8) == [3, 2, 0, 3, 0, 0, 0, 0])
    spec = bm.spectrum(b)
    nonleading = [e for e in spec if not e["leading"]]
    check("one non-leading eigenvalue", len(nonleading) == 1)
    lam = nonleading[0]["lambda"]
    check("eigenvalue real negative", abs(lam[1]) < 1e-10 and -1 < lam[0] < -1 / b.value)

    # the eigenfunctional at the leading eigenvalue is the identity
    (fx, _), tail = bm.eval_f(b, (1.0, 0.0), 0.377, 1e-10)
    check("identity at leading eigenvalue", abs(fx - 0.377) < 1e-9, f"tail {tail:.1e}")

    # detector: residual vanishes at the located eigenvalue, not elsewhere
    r_eig = bm.continuity_residual(b, lam)
    r_off = bm.continuity_residual(b, (0.7, 0.1))
    check("residual detector", r_eig < 1e-9 < r_off, f"{r_eig:.1e} vs {r_off:.2f}")

    # invariant density integrates to one
    h = bm.parry_density(b)
    mass = sum(c * x for x, c in h)
    check("density mass", abs(mass - 1) < 1e-12, f"{len(h)} terms")

    # decay rates: constructed observable beats the sub-leading modulus
    m_beta = abs(complex(*lam))
    a_generic, r2g = bm.decay_rate(b, construct=False)
    a_constructed, r2c = bm.decay_rate(b, construct=True)
    check(
        "decay separation",
        a_constructed < 0.9 * m_beta and abs(a_generic - m_beta) < 0.1 * m_beta,
        f"constructed {a_constructed:.4f}, generic {a_generic:.4f}, M {m_beta:.4f}",
    )
    check("decay fits clean", r2g > 0.98 and r2c > 0.98)

    # difference quotients blow up along left approximants
    steps, fitted = bm.nondiff_probe(b, lam, count=6)
    quotients = [q for (_, _, q) in steps]
    check(
        "quotient blow-up",
        all(b > a for a, b in zip(quotients[2:], quotients[3:])) and quotients[-1] > 10 * quotients[0],
        f"{quotients[0]:.3e} -> {quotients[-1]:.3e}",
    )
    hc = bm.holder_constants(b, lam)
    check("holder constants", hc["gamma1"] == 1.0 and hc["gamma2"] == 1.0)
    check("fitted exponent near alpha0", abs(fitted - hc["alpha0"]) < 0.25 * hc["alpha0"])

    # quartic family verification
    rep = bm.verify_family("P", 3)
    check("family verification", rep["all_ok"], f"eig err {rep['eigenvalue_error']:.1e}")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
