"""Smoke test for the robinspec Python extension.

Build it first, either with `maturin develop -m crates/python/Cargo.toml`
or with `python/build.sh`, which copies the cdylib next to this script.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import robinspec  # noqa: E402


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    # Interval (0, 1), sigma = 1 at both ends: k tan(k/2) = 1.
    lo, hi = 0.5, 1.5
    for _ in range(80):
        k = 0.5 * (lo + hi)
        lo, hi = (k, hi) if k * math.tan(k / 2) < 1 else (lo, k)
    exact = robinspec.interval_lambda1(0.0, 1.0, 1.0, 1.0)
    assert close(exact, k * k, 1e-10), (exact, k * k)
    fem = robinspec.lambda1("interval", 1.0, level=4)
    assert close(fem, exact, 1e-3), (fem, exact)

    assert abs(robinspec.lambda1("square", 0.0, level=1)) < 1e-9

    opt = robinspec.optimal(1.0, "square", level=2)
    assert opt["mass_defect"] < 1e-3
    lower, upper = robinspec.optimal_bounds(opt["m"], opt["e1"], opt["area"], opt["gamma1"])
    assert lower * (1 - 0.02) <= opt["xi"] <= upper * (1 + 0.02), (lower, opt["xi"], upper)

    # First zero of J_0, squared.
    assert abs(robinspec.kn_ball(2) - 5.783185962946784) < 1e-6
    assert robinspec.li_yau_bound(2) > 0

    try:
        robinspec.lambda1("hexagon")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown domain accepted")

    print("python smoke test OK")


if __name__ == "__main__":
    main()
