"""Smoke test for the hybrid_sat extension module.

Build and run from the repository root:

    cargo build --release -p hybrid-sat-py --features extension-module
    cp target/release/libhybrid_sat_py.so python/hybrid_sat.so
    python3 python/smoke_test.py
"""

import math

import hybrid_sat as hs


def main():
    c = hs.Constraint.or_([1, -2])
    # Both literals false: x1 False (+1), x2 True (-1).
    assert c.fourier_eval([1.0, -1.0]) == 1.0
    assert c.fourier_eval([-1.0, -1.0]) == 0.0
    value, grad = c.fourier_grad([0.0, 0.0])
    assert math.isclose(value, 0.25) and len(grad) == 2

    f = hs.Formula.from_hnf("p hnf 3 3\n1 2 0\nx 1 -3 0\nd >= 1 2 3 0\n")
    assert (f.num_vars, f.num_constraints) == (3, 3)
    assert hs.Formula.from_hnf(f.to_hnf()).to_hnf() == f.to_hnf()

    r = hs.solve(f, seed=1)
    assert r.status == "SAT", r
    assert f.count_violations(r.assignment) == 0
    assert r.text.startswith("s SATISFIABLE\nv ")

    best, truth = f.brute_force_optimum()
    assert best == 0 and f.count_violations(truth) == 0

    value, grad = f.objective([0.1, -0.2, 0.3], formulation="abs", alpha=0.4)
    assert len(grad) == 3 and value > 0

    assert hs.sign_round([-0.5, 0.0, 2.0]) == [True, False, False]

    cnf = hs.gen_random_kcnf(20, 40, 3, 7)
    assert cnf.num_constraints == 40
    assert hs.violation_bound(cnf, 0.0) == 0
    assert hs.gen_random_card(10, 0.5, 0.4, 1).num_constraints == 5

    x_and = hs.Constraint.card(">=", 2, [1, 2])
    assert not x_and.has_isolated_violations()
    witness = x_and.falsify_rounding_friendly(trials=1000, seed=0)
    assert witness is not None and abs(x_and.fourier_eval(witness)) < 1e-9
    assert hs.Constraint.xor([1, 2, 3]).falsify_rounding_friendly(trials=1000) is None

    try:
        hs.Formula.from_hnf("p hnf 1 1\n2 0\n")
    except ValueError as e:
        assert "line 2" in str(e)
    else:
        raise AssertionError("out-of-range literal accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
