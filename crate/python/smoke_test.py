"""Smoke test for the dslab Python extension.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import json
import tempfile
from fractions import Fraction
from pathlib import Path

import dslab


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL: {what}")
    print(f"ok  {what}")


def main():
    square = dslab.HypothesisClass(2, [[1, 1], [1, 2], [2, 1], [2, 2], [2, 2]])
    check(len(square) == 4 and square.n == 2 and square.k == 2, "duplicates dropped on construction")
    check([2, 1] in square and [3, 1] not in square, "membership")
    check(dslab.density(square) == Fraction(1), "density of the binary square is 1")

    res = dslab.mu(square, 2, ell=1)
    check(res["value"] == Fraction(1, 1) and res["sequence"] == [0, 1], "mu over sequences of length 2")
    check(dslab.mu_prime(square, 2)["value"] == Fraction(2), "size-weighted mu on the square")

    cube = dslab.HypothesisClass.cube(3, 1, 1, 2)
    check(len(cube) == 3, "cube k=3, ell=1, s=1, m=2 has 3 hypotheses")
    check(cube.restrict([0, 0]).n == 2, "restriction to a sequence with a repeat")

    ds = dslab.ds_dimension(square)
    check(ds["value"] == 2 and ds["exact"], "DS dimension of the square")
    check(dslab.natarajan_dimension(square)["value"] == 2, "Natarajan dimension of the square")
    check(dslab.vc_dimension(square) == 2, "VC dimension of the square")
    check(dslab.validate_witness(square, ds["witness"]) is None, "witness re-validates")
    line = dslab.HypothesisClass(2, [[1, 1], [2, 1]])
    check(dslab.validate_witness(line, json.dumps(ds["witness"])) is not None, "foreign witness rejected")

    t_star, degrees, orientation = dslab.orient(square)
    check(t_star == 1 and max(degrees) == 1 and len(orientation["edges"]) == 4, "min-max orientation")

    span = dslab.spanning(square)
    check(span["spans"], "monomials span at the DS dimension")

    report = dslab.audit(square, ell=1)
    check(report["verdict"] == "PASS" and report["mu"] == "1/1", "audit passes")

    check(dslab.predict(square, [(0, 2)], 1) == [1], "one-inclusion prediction picks the smaller label on a tie")
    loo = dslab.loo_error(square, [(0, 1), (1, 2)])
    check(loo["holds"] and loo["mistakes"] <= loo["t_star"], "leave-one-out bound")

    wide = dslab.HypothesisClass.cube(3, 1, 2, 4)
    pac = dslab.pac_experiment(wide, 16, trials=20, seed=3)
    check(pac["verdict"] == "PASS" and pac["quantile_err"] <= pac["bound"], "PAC experiment within bound")

    summary = dslab.agnostic(wide, n1=40, t=20, n3=80, seed=1)
    check(summary["all_checks"], "agnostic pipeline checks")
    check(summary == dslab.agnostic(wide, n1=40, t=20, n3=80, seed=1), "agnostic runs reproduce")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "c.json"
        cube.save(str(path))
        check(dslab.HypothesisClass.load(str(path)) == cube, "save and load round trip")
        check(dslab.HypothesisClass.from_json(cube.to_json()) == cube, "json round trip")

    for bad, what in [
        (lambda: dslab.HypothesisClass(2, [[1, 3]]), "label out of range"),
        (lambda: dslab.HypothesisClass(2, [[1], [1, 2]]), "ragged rows"),
        (lambda: dslab.HypothesisClass(2, []), "empty class"),
    ]:
        try:
            bad()
        except ValueError:
            print(f"ok  {what} raises ValueError")
        else:
            raise SystemExit(f"FAIL: {what} accepted")
    try:
        dslab.HypothesisClass.load("/nonexistent/c.json")
    except OSError:
        print("ok  missing file raises OSError")
    else:
        raise SystemExit("FAIL: missing file accepted")

    print(f"dslab {dslab.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
