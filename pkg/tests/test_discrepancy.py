"""Tests for the discrepancy machinery: exact sweeps, sampled cap search,
and the telescoping identity."""

import math

import numpy as np
import pytest

from capdisc import (
    Cap,
    Driver,
    PointSet,
    Provenance,
    Rotation,
    ZonalDensity,
    arc_discrepancy_fixed_length,
    cap_discrepancy_fixed_height,
    circle_discrepancy,
    empirical_cap_fraction,
    generate_qud,
    generate_uniform,
    rotate,
    telescoping_check,
)

TWO_PI = 2.0 * math.pi
S5 = 1.0 / math.sqrt(5.0)
EPS = 1e-9  # perturbation used by the brute-force evaluation


def pointset_from_turns(psi, tag="turns"):
    theta = TWO_PI * np.asarray(psi, dtype=float)
    coords = np.column_stack([np.cos(theta), np.sin(theta)])
    return PointSet(coords, Provenance(tag, 0))


def brute_count(psi, theta0, a):
    """Direct per-point membership in [theta0, theta0 + a) with wraparound."""
    lo = theta0
    hi = theta0 + a
    total = 0
    for x in psi:
        if hi >= 1.0:
            inside = x >= lo or x < hi - 1.0
        else:
            inside = lo <= x < hi
        total += inside
    return total


def brute_arc_discrepancy(psi, a):
    """Exhaustive evaluation at every breakpoint +- 1e-9 perturbations."""
    base = list(psi) + [(x - a) % 1.0 for x in psi]
    candidates = []
    for b in base:
        for t0 in (b - EPS, b, b + EPS):
            candidates.append(t0 % 1.0)
    n = len(psi)
    return max(abs(brute_count(psi, t0, a) / n - a) for t0 in candidates)


def brute_circle_extreme(psi):
    """All-pairs sup over arcs: overfull closures and underfull interiors."""
    x = np.sort(np.asarray(psi, dtype=float))
    n = x.size
    best = 0.0
    for i in range(n):
        for j in range(n):
            length = (x[j] - x[i]) % 1.0
            covered = (j - i) % n + 1  # points i..j cyclically
            best = max(best, covered / n - length)
            if i != j:
                inside = (j - i) % n - 1  # strictly between i and j
                best = max(best, length - inside / n)
            else:
                best = max(best, 1.0 - (n - 1) / n)  # open full loop
    return best


def test_empirical_cap_fraction_trivial():
    e = np.array([0.0, 0.0, 1.0])
    ps = PointSet(np.tile(e, (5, 1)), Provenance("copies", 0))
    assert empirical_cap_fraction(ps, Cap(e, 0.5)) == 1.0
    pair = PointSet(np.array([e, -e]), Provenance("antipodal", 0))
    assert empirical_cap_fraction(pair, Cap(e, 0.0)) == 0.5
    with pytest.raises(ValueError):
        empirical_cap_fraction(pair, Cap(np.array([1.0, 0.0]), 0.0))


def test_half_circle_arcs_on_square_lattice():
    # 4 equally spaced points: any closed half-circle avoiding boundary
    # alignments catches exactly 2 of them
    ps = pointset_from_turns([0.0, 0.25, 0.5, 0.75])
    rng = np.random.default_rng(13)
    for _ in range(25):
        alpha = float(rng.uniform(0.01, 0.24))
        center = np.array([math.cos(TWO_PI * alpha), math.sin(TWO_PI * alpha)])
        assert empirical_cap_fraction(ps, Cap(center, 0.0)) == 0.5


def test_arc_sweep_lattice_exact_zero():
    # turns j/4 and a = 1/4 are exact dyadics: every half-open arc of
    # length 1/4 contains exactly one point, so the sweep returns 0.0
    ps = pointset_from_turns([0.0, 0.25, 0.5, 0.75])
    assert arc_discrepancy_fixed_length(ps, 0.25).value == 0.0


def test_arc_sweep_single_point():
    ps = pointset_from_turns([0.37])
    rep = arc_discrepancy_fixed_length(ps, 0.25)
    assert rep.value == 0.75
    assert rep.method == "exact"
    assert rep.N == 1


def test_arc_sweep_matches_brute_force_on_lattices():
    for n in (4, 5, 6, 7, 8):
        psi = np.arange(n) / n
        ps = pointset_from_turns(psi)
        a = 1.0 / n
        got = arc_discrepancy_fixed_length(ps, a).value
        assert got == brute_arc_discrepancy(np.sort(ps.turns()), a)


def test_arc_sweep_matches_brute_force_random():
    rng = np.random.default_rng(21)
    for trial in range(100):
        n = int(rng.integers(1, 51))
        psi = rng.uniform(0.0, 1.0, n)
        a = float(rng.uniform(0.02, 0.48))
        ps = pointset_from_turns(psi, tag=f"rand{trial}")
        got = arc_discrepancy_fixed_length(ps, a).value
        want = brute_arc_discrepancy(np.sort(ps.turns()), a)
        assert got == want, (trial, n, a)


def test_arc_sweep_validation():
    ps = pointset_from_turns([0.1, 0.4])
    with pytest.raises(ValueError):
        arc_discrepancy_fixed_length(ps, 0.5)
    with pytest.raises(ValueError):
        arc_discrepancy_fixed_length(ps, 0.0)
    sphere_ps = generate_uniform(3, 10, "fibonacci_s2")
    with pytest.raises(ValueError):
        arc_discrepancy_fixed_length(sphere_ps, 0.25)


def test_arc_sweep_rotation_equivariance():
    rng = np.random.default_rng(22)
    psi = rng.uniform(0.0, 1.0, 80)
    ps = pointset_from_turns(psi)
    rho = Rotation.planar(1.234567)
    a = 0.245
    assert arc_discrepancy_fixed_length(ps, a).value == arc_discrepancy_fixed_length(
        rotate(ps, rho), a
    ).value


def test_circle_discrepancy_lattice():
    for n in (2, 4, 5, 8):
        ps = pointset_from_turns(np.arange(n) / n)
        rep = circle_discrepancy(ps)
        assert rep.value == pytest.approx(1.0 / n, abs=1e-15)
        assert rep.star_value == pytest.approx(1.0 / n, abs=1e-15)


def test_circle_discrepancy_single_point():
    rep = circle_discrepancy(pointset_from_turns([0.3]))
    assert rep.value == 1.0
    assert rep.star_value == pytest.approx(0.7, abs=1e-12)


def test_circle_discrepancy_matches_all_pairs_oracle():
    rng = np.random.default_rng(23)
    for trial in range(40):
        n = int(rng.integers(1, 9))
        psi = rng.uniform(0.0, 1.0, n)
        ps = pointset_from_turns(psi, tag=f"c{trial}")
        got = circle_discrepancy(ps).value
        want = brute_circle_extreme(np.sort(ps.turns()))
        assert got == pytest.approx(want, abs=1e-14), (trial, n)


def test_circle_discrepancy_star_is_anchored_sup():
    rng = np.random.default_rng(24)
    psi = np.sort(rng.uniform(0.0, 1.0, 30))
    ps = pointset_from_turns(psi)
    star = circle_discrepancy(ps).star_value
    # brute force over anchored arcs [0, beta) at breakpoints +- eps
    candidates = []
    for b in psi:
        candidates += [max(0.0, b - EPS), b, min(1.0, b + EPS)]
    candidates += [0.0, 1.0 - 1e-15]
    want = max(abs(np.sum(psi < b) / psi.size - b) for b in candidates)
    assert star == pytest.approx(want, abs=1e-8)
    assert circle_discrepancy(ps).value >= star - 1e-15


def test_kronecker_circle_discrepancy():
    ps = generate_uniform(2, 1000, "kronecker_s1")
    assert circle_discrepancy(ps).value < 0.005


def test_cap_search_single_point():
    ps = PointSet(np.array([[0.0, 0.0, 1.0]]), Provenance("one", 0))
    rep = cap_discrepancy_fixed_height(ps, 0.0, M=500, refine=5)
    assert rep.value == 0.5
    assert rep.method == "sampled(M=500,refine=5)"
    assert rep.trace is not None


def test_cap_search_uniform_fibonacci():
    ps = generate_uniform(3, 10_000, "fibonacci_s2")
    rep = cap_discrepancy_fixed_height(ps, S5, M=2000, refine=10)
    assert rep.value < 0.01


def test_cap_search_monotone_in_directions():
    ps = generate_uniform(3, 2000, "fibonacci_s2")
    from capdisc.sphere import fibonacci_sphere

    base = fibonacci_sphere(64)
    extra = np.vstack([base, fibonacci_sphere(37)])
    small = cap_discrepancy_fixed_height(ps, 0.2, M=64, refine=0, directions=base)
    large = cap_discrepancy_fixed_height(ps, 0.2, M=101, refine=0, directions=extra)
    assert large.value >= small.value


def test_cap_search_thread_count_independent():
    ps = generate_uniform(3, 5000, "fibonacci_s2")
    a = cap_discrepancy_fixed_height(ps, 0.3, M=700, refine=6, threads=1)
    b = cap_discrepancy_fixed_height(ps, 0.3, M=700, refine=6, threads=4)
    assert a.value == b.value
    assert a.witness == b.witness


def test_cap_search_zonal_counterexample_contrast():
    d = ZonalDensity(dim=3, degree=3, coefficient=0.8, axis=np.array([0.0, 0.0, 1.0]))
    ps = generate_qud(d, 100_000, Driver("halton_2_3"))
    at_freak = cap_discrepancy_fixed_height(ps, S5, M=2000, refine=20)
    at_zero = cap_discrepancy_fixed_height(ps, 0.0, M=2000, refine=20)
    assert at_freak.value < 0.01
    assert at_zero.value > 0.04
    witness = np.array(at_zero.witness["center"])
    assert abs(witness @ d.axis) > 0.9  # sup sits at the poles
    uniform = generate_uniform(3, 100_000, "fibonacci_s2")
    assert cap_discrepancy_fixed_height(uniform, S5, M=2000, refine=20).value < 0.01
    assert cap_discrepancy_fixed_height(uniform, 0.0, M=2000, refine=20).value < 0.01


def test_cap_search_dim2_redirect():
    ps = generate_uniform(2, 500, "kronecker_s1")
    rep = cap_discrepancy_fixed_height(ps, 0.5, M=10)
    # height-0.5 caps on the circle are closed arcs of fraction arccos(0.5)/pi
    arc = arc_discrepancy_fixed_length(ps, math.acos(0.5) / math.pi)
    assert rep.value == arc.value
    assert rep.method == "exact"


def test_cap_search_validation():
    ps = generate_uniform(3, 100, "fibonacci_s2")
    with pytest.raises(ValueError):
        cap_discrepancy_fixed_height(ps, 1.0, M=10)
    with pytest.raises(ValueError):
        cap_discrepancy_fixed_height(ps, 0.5, M=0)


def test_telescoping_simple():
    ps = pointset_from_turns([0.05, 0.31, 0.64, 0.9])
    res = telescoping_check(ps, 0.3, 1)
    assert res.k == 0
    assert res.beta == pytest.approx(0.6 * math.pi, abs=1e-15)
    assert res.lhs == res.rhs


def test_telescoping_exact_on_random_instances():
    rng = np.random.default_rng(31)
    for trial in range(200):
        n = int(rng.integers(1, 300))
        psi = rng.uniform(0.0, 1.0, n)
        ps = pointset_from_turns(psi, tag=f"t{trial}")
        a = float(rng.uniform(0.01, 0.99))
        m = int(rng.integers(1, 150))
        res = telescoping_check(ps, a, m)
        assert res.lhs == res.rhs, (trial, a, m)
        assert 0.0 <= res.beta < TWO_PI


def test_telescoping_per_point_coverage():
    # each point must be covered k times by the arc tiling, plus once more
    # iff it falls in [0, beta)
    rng = np.random.default_rng(32)
    psi = np.sort(rng.uniform(0.0, 1.0, 50))
    ps = pointset_from_turns(psi)

    def in_wrapped(x, lo, hi):
        if lo > hi:
            return x >= lo or x < hi
        return lo <= x < hi

    for a, m in ((math.sqrt(2.0) - 1.0, 5), (0.3, 7), (0.718281828, 13)):
        res = telescoping_check(ps, a, m)
        beta_turn = res.beta / TWO_PI
        pos = np.arange(m + 1, dtype=float) * a
        frac = pos - np.floor(pos)
        total = 0
        for x in psi:
            covered = sum(in_wrapped(x, lo, hi) for lo, hi in zip(frac[:-1], frac[1:]))
            expected = res.k + (1 if x < beta_turn else 0)
            assert covered == expected, (a, m, x)
            total += covered
        assert total / len(psi) == res.lhs


def test_telescoping_beta_approximates_quarter_turn():
    # continued-fraction style search: smallest m putting beta near pi/2
    a = math.sqrt(2.0) - 1.0
    target = 0.25
    m = next(
        mm
        for mm in range(1, 20_000)
        if abs((mm * a) % 1.0 - target) < 0.01 / TWO_PI
    )
    ps = generate_uniform(2, 100_000, "kronecker_s1")
    res = telescoping_check(ps, a, m)
    assert abs(res.beta - math.pi / 2.0) < 0.01
    emp = float(np.mean(ps.turns() < 0.25))
    assert res.rhs == pytest.approx(res.k + emp, abs=0.01)
    assert res.lhs == res.rhs


def test_telescoping_validation():
    ps = pointset_from_turns([0.1])
    with pytest.raises(ValueError):
        telescoping_check(ps, 0.0, 3)
    with pytest.raises(ValueError):
        telescoping_check(ps, 1.0, 3)
    with pytest.raises(ValueError):
        telescoping_check(ps, 0.5, 0)
    with pytest.raises(ValueError):
        telescoping_check(generate_uniform(3, 5, "fibonacci_s2"), 0.5, 2)
