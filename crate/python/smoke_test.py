"""Smoke test for the binsum_py extension module.

Build and stage the module first:

    cargo build -p binsum-py --release
    cp target/release/libbinsum_py.so python/binsum_py.so

then run `python3 python/smoke_test.py`.
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import binsum_py


def main() -> None:
    f = binsum_py.PrimeField(7)
    assert f.p == 7

    # Degenerate coefficients: S = p exactly.
    re, im, err = f.eval_sum(1, 3, 0, 0)
    assert abs(re - 7.0) <= err and abs(im) <= err

    # Gauss sum: |S_{1,2}(0, 1)| = sqrt(p).
    re, im, err = f.eval_sum(1, 2, 0, 1)
    assert abs(math.hypot(re, im) - math.sqrt(7.0)) <= 16 * err

    # Orbit scan visits exactly s(p-1) representatives and matches the
    # full scan.
    m_orbit, _, err, scanned = f.max_sum(1, 3, full=False)
    m_full, _, _, scanned_full = f.max_sum(1, 3, full=True)
    assert scanned_full == 36
    assert scanned == 6  # s = gcd(1, 3, 6) = 1
    assert abs(m_orbit - m_full) <= 2 * err

    # Closed forms: T_{1,2} = 2p^2 - p and N_{1,2} = 2p - 1.
    assert f.count_t(1, 2) == 2 * 49 - 7
    assert f.count_n(1, 2) == 13
    a0, n_curve, t = f.decompose_t(2)
    assert t == a0 + 6 * n_curve == f.count_t(1, 2)

    # Moment identity: fourth moment = p^2 T.
    m4, m4err = f.fourth_moment(1, 3)
    assert abs(m4 - 49 * f.count_t(1, 3)) <= 1e-3 * 49

    # Exponent reduction leaves T unchanged.
    ks, ns = f.reduce_exponents(2, 6)
    assert f.count_t(2, 6) == f.count_t(ks, ns)

    # F_2 = -2 (X - 1)(Y - 1) over F_5.
    g = binsum_py.PrimeField(5)
    rep = g.factor(1, 2)
    assert rep["unit"] == 3  # -2 mod 5
    assert sorted(rep["factors"]) == [("X - 1", 1), ("Y - 1", 1)]
    assert rep["nontrivial"] == []

    # F_4 over F_7: trivial linear factors plus one quadratic.
    rep = f.factor(1, 4)
    assert rep["min_nontrivial_degree"] == 2
    assert len(rep["nontrivial"]) == 1

    # Canonical polynomial text round-trips through the builders.
    assert g.build_fn(2) == "-2*X*Y + 2*X + 2*Y - 2"
    assert "X^2*Y^2" in f.build_fkn(2, 4) or "X^2" in f.build_fkn(2, 4)

    # Guards surface as ValueError.
    for bad in (lambda: binsum_py.PrimeField(9), lambda: f.factor(3, 3)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("smoke test: ok")


if __name__ == "__main__":
    main()
