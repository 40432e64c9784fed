"""Smoke checks for the _dpplab extension module."""

import math

import _dpplab as dpp


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert close(dpp.void_probability(1.0), 0.243147141611, 1e-9)
    assert close(dpp.palm_void_probability(1.2), 0.439298061954, 1e-9)

    s = dpp.solve_vn(1000.0, 1.0)
    assert close(s["v_n"], 2.54782402948, 1e-8)
    assert abs(s["residual"]) <= 1e-10 * (1.0 / 1000.0**2)

    pts1 = dpp.sample_ginibre(5.0, seed=11)
    pts2 = dpp.sample_ginibre(5.0, seed=11)
    assert pts1 == pts2, "same seed must reproduce the sample"
    assert all(x * x + y * y <= 25.0 + 1e-12 for x, y in pts1)
    assert len(pts1) > 5, "expected around R^2 = 25 points"

    counts = [dpp.sample_disk_count(1.0, seed=1, stream=k) for k in range(4000)]
    void_rate = sum(1 for c in counts if c == 0) / len(counts)
    assert close(void_rate, 0.243147141611, 3 * math.sqrt(0.25 / len(counts)))

    rate = dpp.theorem2_rate(10.0, 1.0 / 32.0, 1e6)
    assert rate > 0

    print("python smoke ok")


if __name__ == "__main__":
    main()
