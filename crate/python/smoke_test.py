"""Smoke test for the `vexp` extension module.

Build and install first:
    pip install --no-build-isolation -e crates/python
then run:
    python python/smoke_test.py
"""

import math

import vexp


def close(a, b, tol):
    return abs(a - b) <= tol * max(abs(b), 1e-300)


def main():
    grid = vexp.Grid(2.0, 1024)
    xs = grid.points()
    ind = [1.0 if 0.0 <= x < 1.0 else 0.0 for x in xs]

    two = vexp.ExponentField.constant(grid, 2.0)
    f = vexp.GridFunction(grid, [2.0 * v for v in ind])
    assert close(vexp.luxemburg_norm(two, f), 2.0, 1e-8)
    assert close(vexp.modular_lp(two, f), 4.0, 1e-12)

    seq = vexp.FuncSequence(grid, [[2.0 * v for v in ind], ind])
    per_term, total = vexp.mixed_modular_p1(two, two, seq)
    assert close(per_term[0], 4.0, 1e-8) and close(per_term[1], 1.0, 1e-8)
    assert close(total, 5.0, 1e-8)
    assert close(vexp.mixed_modular_p1a(two, two, seq), 5.0, 1e-8)
    assert close(vexp.mixed_norm(two, two, seq), math.sqrt(5.0), 1e-8)
    assert vexp.check_normability(two, two) == "COND1"

    # Hilbert case: the dual norm is the l2(L2) norm.
    dual, _gap = vexp.kothe_dual_norm(two, two, seq)
    assert close(dual, math.sqrt(5.0), 1e-3), dual
    assert vexp.norming_ratio(two, two, seq) is not None

    p = vexp.ExponentField(grid, [2.0 + abs(math.sin(x)) for x in xs])
    q = vexp.ExponentField.constant(grid, 1.5)
    assert vexp.check_normability(p, q) == "COND1"
    assert vexp.mixed_norm(p, q, seq) > 0.0

    zero = vexp.ExponentField.constant(grid, 0.0, real=True)
    g = vexp.GridFunction(grid, [math.sin(math.pi * 3 * x / 2.0) for x in xs])
    b = vexp.besov_norm(g, zero, two, two)
    assert close(b, math.sqrt(2.0), 1e-8), b

    try:
        vexp.Grid(1.0, 100)
    except ValueError:
        pass
    else:
        raise AssertionError("non power-of-two grid accepted")

    ok, csv = vexp.verify(["exponents", "lebesgue"], seed=42, samples=3, n_points=256)
    assert ok, csv
    assert csv.startswith("suite,property,samples,failures,worst_margin")
    print("vexp smoke test: ok")


if __name__ == "__main__":
    main()
