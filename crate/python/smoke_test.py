"""Smoke test for the pysmoothlab extension module."""

import json
import math

import pysmoothlab as sl


def main() -> None:
    names = {e["name"] for e in json.loads(sl.corpus())}
    assert {"gaussian", "gaussian-2d", "bump"} <= names, names

    w = sl.modulus("gaussian", 1.5, 2.0, 0.1, n=512)
    assert w > 0.0 and math.isfinite(w), w

    c = json.loads(sl.curve("bump", 1.0, 1.0, deltas=[0.05, 0.1, 0.2], n=512))
    vals = c["values"]
    assert len(vals) == 3 and all(a <= b for a, b in zip(vals, vals[1:])), vals

    e = json.loads(sl.approx("gaussian", 2.0, k_max=4, n=512))
    assert e, e

    r = json.loads(sl.verify("P1a", "gaussian", 2.0, 1.5, n=256))
    assert r["verdict"] == "pass", r["verdict"]

    try:
        sl.verify("P10", "gaussian", 1.0, 1.5, n=256, q=2.0)
    except ValueError as err:
        assert "p = 1" in str(err), err
    else:
        raise AssertionError("P10 with p = 1 in d = 1 must be rejected")

    s = json.loads(sl.verify_matrix(quick=True))
    assert s["failed"] == 0, s
    print(f"pysmoothlab smoke test ok: {s['passed']} quick checks passed")


if __name__ == "__main__":
    main()
