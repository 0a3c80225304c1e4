import functools
import itertools

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ide_tradeoff import regions
from ide_tradeoff.channels import IdeParams, average_params, compose_unreliable
from ide_tradeoff.presets import (
    EXAMPLE1_THETAS,
    EXAMPLE2_STATE2S,
    EXAMPLE3_THETAS,
    example1,
    example2,
    example3,
)
from ide_tradeoff.qmath import ValidationError
from ide_tradeoff.regions import (
    Frontier,
    RatePoint,
    closed_forms,
    converse_outer_point,
    detection_bound,
    frontier_gap,
    frontier_r1,
    frontier_r2_bruteforce,
    rate_bound,
    unreliable_frontier,
    upper_convex_hull,
)

from conftest import random_params

mp.mp.dps = 60


def mp_mutual_information(D, avg, p):
    """I(X;Y) = H(Y) - H(Y|X) for the averaged D-ary channel, in 60-digit arithmetic."""
    a, b, g = (mp.mpf(v) for v in (avg.alpha_bar, avg.beta_bar, avg.gamma_bar))
    p = [mp.mpf(v) for v in p]

    def h(probs):
        return -mp.fsum(q * mp.log(q, 2) for q in probs if q > 0)

    row = lambda i: [g] + [a * (i == j) + b / D for j in range(D)]
    y = [g] + [a * p[j] + b / D for j in range(D)]
    return h(y) - mp.fsum(p[i] * h(row(i)) for i in range(D))


@functools.lru_cache(maxsize=None)
def cached_frontier(D, params):
    return frontier_r1(D, params)


def dirichlet(rng, D):
    return rng.dirichlet(np.full(D, rng.choice([0.2, 1.0, 5.0])))


# rate bound -----------------------------------------------------------------

def test_rate_bound_deterministic_input_is_zero(ex1):
    p = np.zeros(16)
    p[0] = 1
    assert rate_bound(16, average_params(ex1), p) == pytest.approx(0.0, abs=1e-15)


def test_rate_bound_example1_uniform(ex1):
    oracle = 4 + mp.mpf("0.109375") * mp.log(mp.mpf("0.109375"), 2) + mp.mpf("0.890625") * mp.log(mp.mpf("0.059375"), 2)
    value = rate_bound(16, average_params(ex1), np.full(16, 1 / 16))
    assert abs(value - 0.0224) <= 1e-3
    assert value == pytest.approx(float(oracle), rel=1e-12)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_rate_bound_matches_high_precision(seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    D = int(rng.choice([p.d, p.d**2]))
    x = dirichlet(rng, D)
    avg = average_params(p)
    assert rate_bound(D, avg, x) == pytest.approx(float(mp_mutual_information(D, avg, x)), rel=1e-9, abs=1e-14)


def test_rate_bound_near_full_depolarization():
    # naive entropy differences lose every digit here
    p = example1(1e-6)
    avg = average_params(p)
    for D in (16, 256):
        u = np.full(D, 1 / D)
        assert rate_bound(D, avg, u) == pytest.approx(float(mp_mutual_information(D, avg, u)), rel=1e-8)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_uniform_input_attains_r_max(seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    D = int(rng.choice([p.d, p.d**2]))
    cf = closed_forms(D, p)
    assert rate_bound(D, average_params(p), np.full(D, 1 / D)) == pytest.approx(cf.r_max, rel=1e-10, abs=1e-15)
    assert rate_bound(D, average_params(p), dirichlet(rng, D)) <= cf.r_max + 1e-12


def test_rate_bound_length_check(ex1):
    with pytest.raises(ValidationError):
        rate_bound(8, average_params(ex1), np.full(16, 1 / 16))


# detection bound ------------------------------------------------------------

def test_detection_bound_examples(ex1):
    e1 = np.zeros(16)
    e1[0] = 1
    assert detection_bound(16, ex1, e1) == pytest.approx(1 / 32, abs=1e-15)
    e1 = np.zeros(256)
    e1[0] = 1
    assert detection_bound(256, ex1, e1) == pytest.approx(1 / 512, abs=1e-15)
    assert detection_bound(16, ex1, np.full(16, 1 / 16)) == pytest.approx(0.5, abs=1e-15)


def f_terms(D, params, p):
    (p1, p2), (a1, a2), (b1, b2) = params.pi, params.alpha, params.beta
    return p1 * a1 * p + p1 * b1 / D, p2 * a2 * p + p2 * b2 / D


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_min_identity(seed):
    rng = np.random.default_rng(seed)
    params = random_params(rng)
    D = int(rng.integers(1, 9))
    p = dirichlet(rng, D)
    u, v = f_terms(D, params, p)
    floor = min(params.pi[0] * params.gamma[0], params.pi[1] * params.gamma[1])
    via_abs = np.sum(0.5 * (u + v - np.abs(u - v))) + floor
    assert detection_bound(D, params, p) == pytest.approx(via_abs, abs=1e-12)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=200, deadline=None)
def test_concavity_and_convexity(seed):
    rng = np.random.default_rng(seed)
    params = random_params(rng)
    D = int(rng.integers(1, 9))
    p, q = dirichlet(rng, D), dirichlet(rng, D)
    lam = rng.uniform()
    mix = lam * p + (1 - lam) * q
    mix /= mix.sum()
    avg = average_params(params)
    r = lambda x: rate_bound(D, avg, x)
    assert r(mix) >= lam * r(p) + (1 - lam) * r(q) - 1e-9

    def F(x):
        u, v = f_terms(D, params, x)
        return np.sum(np.abs(u - v))

    assert F(mix) <= lam * F(p) + (1 - lam) * F(q) + 1e-9


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    params = random_params(rng)
    D = int(rng.integers(2, 17))
    p = dirichlet(rng, D)
    perm = rng.permutation(D)
    avg = average_params(params)
    assert rate_bound(D, avg, p[perm]) == pytest.approx(rate_bound(D, avg, p), rel=1e-12, abs=1e-15)
    assert detection_bound(D, params, p[perm]) == pytest.approx(detection_bound(D, params, p), abs=1e-15)


# closed forms ---------------------------------------------------------------

def test_closed_forms_example1(ex1):
    cf = closed_forms(16, ex1)
    assert cf.pe_min == pytest.approx(0.03125, abs=1e-15)
    assert cf.pe_star == pytest.approx(0.5, abs=1e-15)
    assert cf.p_th == pytest.approx(1 / 16, abs=1e-15)
    assert not cf.no_tradeoff


def test_closed_forms_example1_entangled_rate(ex1):
    diag = mp.mpf("0.05") + mp.mpf("0.95") / 256
    off = mp.mpf("0.95") / 256
    oracle = 8 + diag * mp.log(diag, 2) + (1 - diag) * mp.log(off, 2)
    cf = closed_forms(256, ex1)
    assert abs(cf.r_max - 0.1327) <= 1e-3
    assert cf.r_max == pytest.approx(float(oracle), rel=1e-12)


def test_parallel_lines_no_tradeoff():
    p = IdeParams.from_states(4, (0.5, 0.3, 0.2), (0.25, 0.5, 0.25), 0.3, pi1=1 / 3)
    # pi1 alpha1 = pi2 alpha2 = 1/6
    cf = closed_forms(4, p)
    assert cf.p_th is None and cf.no_tradeoff


def test_threshold_symmetric_under_state_swap():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = random_params(rng)
        swapped = IdeParams.from_states(p.d, p.triple(2), p.triple(1), p.theta[1], p.pi[1])
        a, b = closed_forms(p.d, p), closed_forms(p.d, swapped)
        assert a.no_tradeoff == b.no_tradeoff
        assert a.pe_min == pytest.approx(b.pe_min, abs=1e-15)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_closed_forms_bracket_detection_bound(seed):
    rng = np.random.default_rng(seed)
    params = random_params(rng)
    D = int(rng.integers(1, 9))
    cf = closed_forms(D, params)
    assert cf.pe_min <= cf.pe_star + 1e-15
    pe = detection_bound(D, params, dirichlet(rng, D))
    assert cf.pe_min - 1e-12 <= pe <= cf.pe_star + 1e-12


# frontier -------------------------------------------------------------------

def assert_concave_monotone(fr: Frontier):
    pe, rate = fr.pe, fr.rate
    if len(pe) > 1 and pe[1] == pe[0]:
        pe, rate = pe[1:], rate[1:]
    assert np.all(np.diff(pe) > 0)
    assert np.all(np.diff(rate) >= 0)
    slopes = np.diff(rate) / np.diff(pe)
    assert np.all(np.diff(slopes) <= 1e-9 * np.maximum(1, np.abs(slopes[1:])))


def test_frontier_example1_anchors(ex1):
    fr = cached_frontier(16, ex1)
    assert fr.pe_min == pytest.approx(1 / 32, abs=1e-12)
    assert fr.rate_at(0.5) == pytest.approx(closed_forms(16, ex1).r_max, abs=1e-12)
    assert abs(fr.rate_at(0.5) - 0.0224) <= 1e-3
    assert np.isnan(fr.rate_at(0.01))
    assert_concave_monotone(fr)


def test_frontier_starts_at_zero_rate(ex1):
    fr = cached_frontier(16, ex1)
    assert fr.rate[0] == 0.0 and fr.pe[1] > fr.pe[0]


def test_frontier_vertical_jump_when_flat():
    p = IdeParams.from_states(4, (0.5, 0.3, 0.2), (0.25, 0.5, 0.25), 0.3, pi1=1 / 3)
    fr = frontier_r1(4, p)
    assert fr.pe[0] == fr.pe[1] and fr.rate[0] == 0.0 and fr.rate[1] > 0


def test_frontier_points_are_achievable(ex1):
    fr = cached_frontier(16, ex1)
    avg = average_params(ex1)
    for k in range(0, len(fr), 97):
        n, p1, p2 = fr.witness[k]
        p = np.array([p1] * n + [p2] * (16 - n))
        assert detection_bound(16, ex1, p) == pytest.approx(fr.pe[k], abs=1e-12)
        assert rate_bound(16, avg, p) == pytest.approx(fr.rate[k], abs=1e-12)


def test_frontier_thread_count_independent(ex1):
    a = frontier_r1(16, ex1, grid=128, workers=1, chunk=3)
    b = frontier_r1(16, ex1, grid=128, workers=4, chunk=3)
    assert a.to_csv() == b.to_csv()


def test_frontier_csv_round_trip(tmp_path, ex1):
    fr = frontier_r1(16, ex1, grid=64)
    text = fr.to_csv(tmp_path / "f.csv")
    assert text.splitlines()[0] == "pe,rate,n,p1,p2"
    again = Frontier.from_csv(tmp_path / "f.csv")
    assert again.to_csv() == text


def test_no_tradeoff_frontier_is_single_step():
    p = IdeParams.from_states(4, (0.5, 0.3, 0.2), (0.25, 0.5, 0.25), 0.3, pi1=1 / 3)
    fr = frontier_r1(4, p)
    cf = closed_forms(4, p)
    assert fr.pe_min == pytest.approx(cf.pe_star, abs=1e-9)
    assert fr.rate_at(cf.pe_star) == pytest.approx(cf.r_max, abs=1e-12)


def no_tradeoff_params(rng):
    """Random params whose threshold falls outside (0, 1) or is undefined."""
    while True:
        p = random_params(rng)
        D = int(rng.integers(2, 9))
        if rng.uniform() < 0.3:
            a1 = p.alpha[0]
            pi1 = p.pi[0]
            a2 = pi1 * a1 / (1 - pi1)
            if a2 <= 1:
                b2 = rng.uniform(0, 1 - a2)
                p = IdeParams.from_states(p.d, p.triple(1), (a2, b2, 1 - a2 - b2), p.theta[0], pi1)
        if closed_forms(D, p).no_tradeoff:
            return D, p


@pytest.mark.parametrize("seed", range(25))
def test_no_tradeoff_flag_implies_flat_frontier(seed):
    D, p = no_tradeoff_params(np.random.default_rng(seed))
    cf = closed_forms(D, p)
    fr = frontier_r1(D, p, grid=128)
    assert fr.pe_min == pytest.approx(cf.pe_star, abs=1e-9)
    assert fr.r_max == pytest.approx(cf.r_max, abs=1e-9)


@pytest.mark.parametrize("seed", range(25))
def test_tradeoff_flag_implies_sloped_frontier(seed):
    rng = np.random.default_rng(1000 + seed)
    while True:
        p = random_params(rng)
        D = int(rng.integers(2, 9))
        cf = closed_forms(D, p)
        if not cf.no_tradeoff:
            break
    fr = frontier_r1(D, p, grid=128)
    assert fr.pe_min == pytest.approx(cf.pe_min, abs=1e-12)
    assert cf.pe_min < cf.pe_star
    assert fr.r_max == pytest.approx(cf.r_max, abs=1e-9)


def example_sets():
    sets = [("ex1", example1(t)) for t in EXAMPLE1_THETAS]
    sets += [("ex2", example2(s)) for s in EXAMPLE2_STATE2S]
    sets += [("ex3", example3(t)) for t in EXAMPLE3_THETAS]
    return sets


@pytest.mark.parametrize("name, params", example_sets())
def test_entangled_dominates_on_examples(name, params):
    ent, plain = cached_frontier(256, params), cached_frontier(16, params)
    grid = np.linspace(plain.pe_min, max(plain.pe_at_r_max, ent.pe_at_r_max), 4001)
    assert np.all(ent.rate_at(grid) >= plain.rate_at(grid) - 1e-9)
    assert_concave_monotone(ent)
    assert_concave_monotone(plain)


# brute force ----------------------------------------------------------------

def test_bruteforce_single_point():
    p = random_params(np.random.default_rng(0))
    fr = frontier_r2_bruteforce(1, p)
    assert len(fr) == 1 and fr.rate[0] == 0.0


@pytest.mark.parametrize("seed", range(4))
def test_bruteforce_d2_matches_two_value(seed):
    p = random_params(np.random.default_rng(seed))
    brute = frontier_r2_bruteforce(2, p, samples=20_000, rng_seed=seed)
    assert frontier_gap(brute, frontier_r1(2, p)) <= 1e-3


@pytest.mark.parametrize("D", [3, 4, 5])
def test_bruteforce_never_beats_two_value(D):
    p = random_params(np.random.default_rng(D))
    brute = frontier_r2_bruteforce(D, p, samples=20_000, rng_seed=D)
    r1 = frontier_r1(D, p)
    grid = np.linspace(brute.pe_min, brute.pe_at_r_max, 2001)
    assert np.all(brute.rate_at(grid) <= r1.rate_at(grid) + 1e-3)


def test_bruteforce_dimension_cap():
    with pytest.raises(ValueError):
        frontier_r2_bruteforce(7, random_params(np.random.default_rng(0)))


# hull -----------------------------------------------------------------------

def test_hull_two_points():
    fr = upper_convex_hull([(0.1, 0.0), (0.5, 1.0)])
    assert fr.points == [RatePoint(0.1, 0.0), RatePoint(0.5, 1.0)]


def test_hull_collinear_boundary_unchanged():
    pts = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]
    fr = upper_convex_hull(pts)
    grid = np.linspace(0, 1, 101)
    np.testing.assert_allclose(fr.rate_at(grid), grid, atol=1e-15)


def test_hull_excludes_point_below():
    fr = upper_convex_hull([RatePoint(0.0, 0.0), RatePoint(0.5, 0.2), RatePoint(1.0, 1.0)])
    assert RatePoint(0.5, 0.2) not in fr.points


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=40))
@settings(max_examples=80, deadline=None)
def test_hull_dominates_inputs(points):
    fr = upper_convex_hull(points)
    for e, r in points:
        assert fr.rate_at(e) >= r - 1e-9


def test_hull_empty():
    with pytest.raises(ValueError):
        upper_convex_hull([])


# converse -------------------------------------------------------------------

def basis_states(d):
    out = []
    for w in range(d):
        rho = np.zeros((d, d))
        rho[w, w] = 1
        out.append(rho)
    return out


def test_converse_single_state_zero_rate(ex1):
    assert converse_outer_point(ex1, basis_states(16)[:1]).rate == 0.0


def test_converse_computational_basis(ex1):
    pt = converse_outer_point(ex1, basis_states(16))
    assert abs(pt.rate - 0.0224) <= 1e-3
    assert pt.rate == pytest.approx(rate_bound(16, average_params(ex1), np.full(16, 1 / 16)), rel=1e-9)
    assert pt.pe == pytest.approx(0.5, abs=1e-12)


def test_converse_repeated_maximally_mixed(ex1):
    assert converse_outer_point(ex1, [np.eye(16) / 16] * 16).rate == pytest.approx(0.0, abs=1e-12)


def test_converse_rejects_bad_input(ex1):
    with pytest.raises(ValueError, match="uniform"):
        converse_outer_point(ex1, basis_states(16)[:2], weights=[0.3, 0.7])
    with pytest.raises(ValidationError):
        converse_outer_point(ex1, basis_states(4))


# unreliable entanglement ----------------------------------------------------

def test_unreliable_alpha_one_matches_reliable(ex1):
    fr = unreliable_frontier(ex1, 1.0)
    assert frontier_gap(fr, cached_frontier(256, ex1)) <= 1e-12


def test_unreliable_alpha_zero_no_tradeoff(ex1):
    cf = closed_forms(256, compose_unreliable(ex1, 0.0))
    assert cf.no_tradeoff and cf.p_th is None


@pytest.mark.parametrize("at", [0.95, 0.8, 0.5])
def test_unreliable_union_dominates_parts(ex1, at):
    fr = unreliable_frontier(ex1, at)
    sdc = frontier_r1(256, compose_unreliable(ex1, at))
    plain = cached_frontier(16, ex1)
    for part in (sdc, plain):
        grid = np.linspace(part.pe_min, part.pe_at_r_max, 2001)
        assert np.all(fr.rate_at(grid) >= part.rate_at(grid) - 1e-12)
