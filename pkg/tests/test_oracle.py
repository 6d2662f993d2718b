import math

import numpy as np
import pytest

from rdgsim.noise import AngleDistribution, RdgInstance, make_rng
from rdgsim.oracle import (
    dump_reference_values,
    exhaustive_vote_error,
    expected_error_quadrature,
    extract_delta_slope,
    gauss_hermite,
    gaussian_expectation,
    helstrom_error_quadrature,
    simulate_maj_error,
)
from rdgsim.protocols import (
    QspProtocol,
    helstrom_error_noisy,
    maj_protocol_error,
    majority_vote,
    qsp_error_mc,
    qsp_error_noiseless,
)
from rdgsim.qubit import bloch_state


# ---------------------------------------------------------------------------
# Gauss-Hermite rules
# ---------------------------------------------------------------------------


def test_gauss_hermite_order2_closed_form():
    rule = gauss_hermite(2)
    assert np.allclose(np.sort(rule.nodes), [-1 / math.sqrt(2), 1 / math.sqrt(2)],
                       atol=1e-12)
    assert np.allclose(rule.weights, [math.sqrt(math.pi) / 2] * 2, atol=1e-12)
    # integral e^{-x^2} x^2 dx = sqrt(pi)/2
    assert float(np.sum(rule.weights * rule.nodes**2)) == pytest.approx(
        math.sqrt(math.pi) / 2, abs=1e-12
    )


def test_gauss_hermite_constant_integrand():
    for order in (2, 8, 64, 128):
        rule = gauss_hermite(order)
        assert float(rule.weights.sum()) == pytest.approx(
            math.sqrt(math.pi), abs=1e-13
        )


def test_gauss_hermite_nodes_symmetric():
    for order in (3, 10, 33):
        nodes = np.sort(gauss_hermite(order).nodes)
        assert np.allclose(nodes, -nodes[::-1], atol=1e-12)


def test_gauss_hermite_degree_exactness():
    # exact for monomials up to degree 2*order - 1
    rule = gauss_hermite(6)
    # integral e^{-x^2} x^{2k} dx = gamma(k + 1/2)
    for k in (0, 1, 2, 3, 4, 5):
        exact = math.gamma(k + 0.5)
        got = float(np.sum(rule.weights * rule.nodes ** (2 * k)))
        assert got == pytest.approx(exact, rel=1e-12)


def test_gauss_hermite_order_bounds():
    with pytest.raises(ValueError):
        gauss_hermite(1)
    with pytest.raises(ValueError):
        gauss_hermite(129)


def test_gaussian_expectation_moments():
    d = AngleDistribution(0.7, 0.3)
    assert gaussian_expectation(lambda t: t, d) == pytest.approx(0.7, abs=1e-12)
    assert gaussian_expectation(lambda t: (t - 0.7) ** 2, d) == pytest.approx(
        0.09, abs=1e-12
    )


# ---------------------------------------------------------------------------
# Quadrature backends vs closed forms
# ---------------------------------------------------------------------------


def test_helstrom_quadrature_matches_closed_form():
    rdg = RdgInstance.from_delta_sigma(0.3, 0.4)
    assert helstrom_error_quadrature(rdg) == pytest.approx(
        helstrom_error_noisy(rdg), abs=1e-8
    )


def test_expected_error_quadrature_noiseless_reduction():
    rdg = RdgInstance.from_delta_sigma(0.2, 0.0)
    proto = QspProtocol.simple(3, rdg)
    quad = expected_error_quadrature(proto, rdg, order=4)
    exact = qsp_error_noiseless(proto, rdg).error_prob
    assert quad == pytest.approx(exact, abs=1e-12)


def test_expected_error_quadrature_vs_mc_random_protocols():
    rng = np.random.default_rng(41)
    rdg = RdgInstance.from_delta_sigma(0.25, 0.3)
    for trial in range(50):
        r = int(rng.integers(1, 4))
        phases = rng.uniform(-math.pi, math.pi, r + 1)
        prep = bloch_state(
            math.acos(rng.uniform(-1, 1)), rng.uniform(-math.pi, math.pi)
        )
        meas = bloch_state(
            math.acos(rng.uniform(-1, 1)), rng.uniform(-math.pi, math.pi)
        )
        proto = QspProtocol(((phases, prep, meas),))
        quad = expected_error_quadrature(proto, rdg, order=12)
        mc = qsp_error_mc(proto, rdg, 20_000, make_rng(41, trial))
        assert abs(mc.error_prob - quad) <= 3 * mc.std_error + 1e-6


def test_quadrature_matches_one_shot_closed_form():
    # success = ((1 + e^{-2s^2} cos 2a) + (1 - e^{-2s^2} cos 2(a + d))) / 4
    # at the optimal offset a = pi/4 - d/2
    delta, sigma = 0.3, 0.4
    rdg = RdgInstance.from_delta_sigma(delta, sigma)
    alpha = math.pi / 4 - delta / 2
    att = math.exp(-2 * sigma**2)
    closed = 1 - 0.25 * (
        (1 + att * math.cos(2 * alpha)) + (1 - att * math.cos(2 * (alpha + delta)))
    )
    proto = QspProtocol.simple(1, rdg)
    quad = expected_error_quadrature(proto, rdg, order=64)
    assert quad == pytest.approx(closed, abs=1e-10)


# ---------------------------------------------------------------------------
# Exhaustive vote enumeration
# ---------------------------------------------------------------------------


def test_exhaustive_vote_matches_binomial_sum():
    for p in (0.5, 0.6, 0.9):
        for m in (0, 1, 3):
            assert exhaustive_vote_error(p, m) == pytest.approx(
                majority_vote(p, m), abs=1e-14
            )


def test_exhaustive_vote_fixed_point():
    assert exhaustive_vote_error(0.5, 2) == pytest.approx(0.5, abs=1e-14)


def test_exhaustive_vote_single_shot():
    for p in (0.0, 0.3, 1.0):
        assert exhaustive_vote_error(p, 0) == pytest.approx(p, abs=1e-14)


def test_exhaustive_vote_bounds():
    with pytest.raises(ValueError):
        exhaustive_vote_error(1.5, 1)
    with pytest.raises(ValueError):
        exhaustive_vote_error(0.5, 21)


# ---------------------------------------------------------------------------
# End-to-end simulation and slope extraction
# ---------------------------------------------------------------------------


def test_simulate_maj_matches_analytic():
    rdg = RdgInstance.from_delta_sigma(0.2, 0.25)
    analytic = maj_protocol_error(rdg, 1).error_prob
    est, std = simulate_maj_error(rdg, 1, 2 * 10**5, make_rng(51))
    assert abs(est - analytic) <= 3 * std


def test_extract_delta_slope_linear_function():
    slope = extract_delta_slope(lambda d: 0.5 * (1 - 1.5 * d))
    assert slope == pytest.approx(0.75, rel=1e-6)


def test_dump_reference_values_consistent():
    vals = dump_reference_values()
    pair = vals["helstrom_error_delta0.3_sigma0.4"]
    assert pair["closed_form"] == pytest.approx(pair["quadrature"], abs=1e-8)
    pair = vals["cos2_moment_mu0.2_sigma0.4"]
    assert pair["closed_form"] == pytest.approx(pair["quadrature"], abs=1e-10)
    pair = vals["majority_vote_p0.75_M1"]
    assert pair["closed_form"] == pytest.approx(pair["enumeration"], abs=1e-14)
    pair = vals["simple_qsp3_error_delta0.1_sigma0.2"]
    assert pair["closed_form"] == pytest.approx(pair["quadrature"], abs=1e-8)
