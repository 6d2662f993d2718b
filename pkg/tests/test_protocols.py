import math

import numpy as np
import pytest

from rdgsim.noise import RdgInstance, make_rng
from rdgsim.protocols import (
    QspProtocol,
    adaptive_incoherent_error,
    adaptive_incoherent_error_exact,
    helstrom_error_noiseless,
    helstrom_error_noisy,
    maj_error_small_delta,
    maj_protocol_error,
    majority_vote,
    qsp_error_mc,
    qsp_error_noiseless,
    qsp_unitary,
    simple_qsp_error_exact,
    simple_qsp_error_noiseless,
    simple_qsp_error_noisy,
    transition_sigma,
)
from rdgsim.qubit import is_unitary, rot_x
from rdgsim.oracle import expected_error_quadrature


# ---------------------------------------------------------------------------
# One-shot discrimination
# ---------------------------------------------------------------------------


def test_helstrom_noiseless_values():
    assert helstrom_error_noiseless(0.0) == pytest.approx(0.5, abs=1e-12)
    assert helstrom_error_noiseless(math.pi / 2) == pytest.approx(0.0, abs=1e-12)
    assert helstrom_error_noiseless(math.pi / 6) == pytest.approx(0.25, abs=1e-12)


def test_helstrom_noiseless_domain():
    with pytest.raises(ValueError):
        helstrom_error_noiseless(-0.1)
    with pytest.raises(ValueError):
        helstrom_error_noiseless(2.0)


def test_helstrom_noisy_noiseless_limit():
    for delta in (0.0, 0.2, 1.0, math.pi / 2):
        rdg = RdgInstance.from_delta_sigma(delta, 0.0)
        assert helstrom_error_noisy(rdg) == pytest.approx(
            helstrom_error_noiseless(delta), abs=1e-12
        )


def test_helstrom_noisy_indistinguishable():
    for sigma in (0.0, 0.3, 1.5):
        rdg = RdgInstance.from_delta_sigma(0.0, sigma)
        assert helstrom_error_noisy(rdg) == pytest.approx(0.5, abs=1e-12)


def test_helstrom_noisy_swap_invariant():
    rdg = RdgInstance.from_delta_sigma(0.3, 0.4)
    assert helstrom_error_noisy(rdg) == pytest.approx(
        helstrom_error_noisy(rdg.swapped()), abs=1e-12
    )


# ---------------------------------------------------------------------------
# Majority vote
# ---------------------------------------------------------------------------


def test_majority_vote_fixed_point():
    for m in range(5):
        assert majority_vote(0.5, m) == pytest.approx(0.5, abs=1e-14)


def test_majority_vote_certain():
    for m in range(5):
        assert majority_vote(1.0, m) == pytest.approx(1.0, abs=1e-14)


def test_majority_vote_binomial_value():
    # p^3 + 3 p^2 (1-p) at p = 0.75
    assert majority_vote(0.75, 1) == pytest.approx(0.84375, abs=1e-14)


def test_majority_vote_amplifies():
    for p in (0.55, 0.7, 0.9):
        for m in (1, 2, 4):
            assert majority_vote(p, m) > p


def test_majority_vote_symmetry():
    rng = np.random.default_rng(9)
    for p in rng.uniform(0, 1, 25):
        for m in (0, 1, 3):
            assert majority_vote(1 - p, m) == pytest.approx(
                1 - majority_vote(p, m), abs=1e-12
            )


def test_maj_protocol_noiseless_values():
    rdg = RdgInstance.from_delta_sigma(math.pi / 2, 0.0)
    assert maj_protocol_error(rdg, 1).error_prob == pytest.approx(0.0, abs=1e-12)


def test_maj_protocol_matches_direct_binomial():
    delta = 0.2
    rdg = RdgInstance.from_delta_sigma(delta, 0.0)
    s = math.sin(delta)
    direct = 2.0 ** (-3) * sum(
        math.comb(3, k) * (1 - s) ** (3 - k) * (1 + s) ** k for k in range(2)
    )
    assert maj_protocol_error(rdg, 1).error_prob == pytest.approx(direct, abs=1e-12)


def test_maj_protocol_vs_end_to_end_simulation():
    from rdgsim.oracle import simulate_maj_error

    rdg = RdgInstance.from_delta_sigma(0.1, 0.3)
    analytic = maj_protocol_error(rdg, 1).error_prob
    est, std = simulate_maj_error(rdg, 1, 10**6, make_rng(21))
    assert abs(est - analytic) < 3 * std


def test_maj_protocol_queries_used():
    rdg = RdgInstance.from_delta_sigma(0.1, 0.1)
    assert maj_protocol_error(rdg, 2).queries_used == 5


# ---------------------------------------------------------------------------
# QSP unitaries and errors
# ---------------------------------------------------------------------------


def test_qsp_unitary_zero_queries():
    assert np.allclose(qsp_unitary([0.0], []), np.eye(2), atol=1e-12)


def test_qsp_unitary_zero_phases_accumulate():
    t = 0.37
    u = qsp_unitary([0.0, 0.0, 0.0, 0.0], [t, t, t])
    assert np.allclose(u, rot_x(3 * t), atol=1e-12)


def test_qsp_unitary_random_is_unitary():
    rng = np.random.default_rng(11)
    for _ in range(100):
        r = int(rng.integers(0, 5))
        phi = rng.uniform(-math.pi, math.pi, r + 1)
        th = rng.uniform(-math.pi, math.pi, r)
        assert is_unitary(qsp_unitary(phi, th))


def test_qsp_unitary_length_mismatch():
    with pytest.raises(ValueError):
        qsp_unitary([0.0, 0.0], [0.1, 0.2])


def test_qsp_noiseless_perfect_at_pi_over_n():
    # The clamped formula reports 0 once perfect discrimination is possible;
    # reaching it takes nonzero phases, so the all-zero-phase protocol itself
    # evaluates to the unclamped 1/2 (1 - sin(N delta)) there.
    rdg = RdgInstance.from_delta_sigma(math.pi / 3, 0.0)
    assert simple_qsp_error_noiseless(math.pi / 3, 3) == 0.0
    proto = QspProtocol.simple(3, rdg)
    assert qsp_error_noiseless(proto, rdg).error_prob == pytest.approx(
        0.5 * (1 - math.sin(math.pi)), abs=1e-12
    )


def test_qsp_noiseless_simple_formula():
    rdg = RdgInstance.from_delta_sigma(0.1, 0.0)
    proto = QspProtocol.simple(3, rdg)
    res = qsp_error_noiseless(proto, rdg)
    assert res.error_prob == pytest.approx(0.5 * (1 - math.sin(0.3)), abs=1e-12)
    assert simple_qsp_error_noiseless(0.1, 3) == pytest.approx(
        res.error_prob, abs=1e-12
    )


def test_qsp_noiseless_single_query_is_helstrom():
    for delta in (0.05, 0.3, 1.0):
        rdg = RdgInstance.from_delta_sigma(delta, 0.0)
        res = qsp_error_noiseless(QspProtocol.simple(1, rdg), rdg)
        assert res.error_prob == pytest.approx(
            helstrom_error_noiseless(delta), abs=1e-12
        )


def test_qsp_noiseless_rejects_noise():
    rdg = RdgInstance.from_delta_sigma(0.1, 0.2)
    with pytest.raises(ValueError):
        qsp_error_noiseless(QspProtocol.simple(3, rdg), rdg)


def test_qsp_mc_degenerate_sampling():
    rdg = RdgInstance.from_delta_sigma(0.1, 0.0)
    proto = QspProtocol.simple(3, rdg)
    res = qsp_error_mc(proto, rdg, 2000, make_rng(1))
    exact = qsp_error_noiseless(proto, rdg).error_prob
    assert abs(res.error_prob - exact) <= 3 * res.std_error + 1e-12


def test_qsp_mc_single_query_matches_helstrom():
    rdg = RdgInstance.from_delta_sigma(0.3, 0.4)
    proto = QspProtocol.simple(1, rdg)
    res = qsp_error_mc(proto, rdg, 10**5, make_rng(2))
    assert abs(res.error_prob - helstrom_error_noisy(rdg)) <= 3 * res.std_error


def test_qsp_mc_simple3_matches_exact_and_quadrature():
    rdg = RdgInstance.from_delta_sigma(0.1, 0.2)
    proto = QspProtocol.simple(3, rdg)
    res = qsp_error_mc(proto, rdg, 2 * 10**5, make_rng(3))
    exact = simple_qsp_error_exact(rdg, 3)
    quad = expected_error_quadrature(proto, rdg, order=20)
    assert abs(res.error_prob - exact) <= 3 * res.std_error
    assert abs(res.error_prob - quad) <= 1e-3
    # the linearized small-delta form is close but biased by O(delta^3)
    assert simple_qsp_error_noisy(rdg, 1) == pytest.approx(exact, abs=5e-3)


def test_qsp_mc_incoherent_matches_maj():
    rdg = RdgInstance.from_delta_sigma(0.2, 0.3)
    proto = QspProtocol.incoherent(3, rdg)
    res = qsp_error_mc(proto, rdg, 10**5, make_rng(4))
    analytic = maj_protocol_error(rdg, 1).error_prob
    assert abs(res.error_prob - analytic) <= 3 * res.std_error


def test_qsp_mc_swap_invariant_within_noise():
    rdg = RdgInstance.from_delta_sigma(0.2, 0.3)
    proto = QspProtocol.simple(3, rdg)
    a = qsp_error_mc(proto, rdg, 10**5, make_rng(5))
    b = qsp_error_mc(proto, rdg.swapped(), 10**5, make_rng(5))
    tol = 3 * math.hypot(a.std_error, b.std_error)
    assert abs(a.error_prob - b.error_prob) <= tol


# ---------------------------------------------------------------------------
# Small-delta closed forms and the transition noise level
# ---------------------------------------------------------------------------


def test_simple_qsp_noisy_at_zero_delta():
    rdg = RdgInstance.from_delta_sigma(0.0, 0.7)
    assert simple_qsp_error_noisy(rdg, 1) == pytest.approx(0.5, abs=1e-12)


def test_simple_qsp_noisy_single_query():
    rdg = RdgInstance.from_delta_sigma(0.05, 0.2)
    linearized = 0.5 * (1 - 0.05 * math.exp(-2 * 0.04))
    assert simple_qsp_error_noisy(rdg, 0) == pytest.approx(linearized, abs=1e-12)


def test_simple_qsp_noisy_vs_exact_small_delta():
    rdg = RdgInstance.from_delta_sigma(0.05, 0.2)
    lin = simple_qsp_error_noisy(rdg, 1)
    direct = 0.5 * (1 - 0.15 * math.exp(-6 * 0.04))
    assert lin == pytest.approx(direct, abs=1e-12)
    # cubic remainder: |sin(3 delta) - 3 delta| / 2 ~ 2e-4
    assert lin == pytest.approx(simple_qsp_error_exact(rdg, 3), abs=3e-4)


def test_maj_small_delta_no_amplification():
    rdg = RdgInstance.from_delta_sigma(0.04, 0.3)
    expected = 0.5 * (1 - 0.04 * math.exp(-2 * 0.09))
    assert maj_error_small_delta(rdg, 0) == pytest.approx(expected, abs=1e-12)


def test_maj_small_delta_coefficient():
    rdg = RdgInstance.from_delta_sigma(0.05, 0.2)
    expected = 0.5 * (1 - 1.5 * 0.05 * math.exp(-0.08))
    assert maj_error_small_delta(rdg, 1) == pytest.approx(expected, abs=1e-12)


def test_maj_small_delta_vs_vote_linearization():
    # MAJ(helstrom) and the small-delta form agree to O(delta^3)
    for delta in (0.01, 0.03):
        rdg = RdgInstance.from_delta_sigma(delta, 0.2)
        full = maj_protocol_error(rdg, 1).error_prob
        lin = maj_error_small_delta(rdg, 1)
        assert abs(full - lin) < 5 * delta**3 + 1e-12


def test_maj_small_delta_beats_single_shot():
    rdg = RdgInstance.from_delta_sigma(0.02, 0.3)
    single = 0.5 * (1 - rdg.delta * math.exp(-2 * rdg.sigma**2))
    assert maj_error_small_delta(rdg, 1) <= single


def test_transition_sigma_m1():
    assert transition_sigma(1) == pytest.approx(math.sqrt(math.log(2)) / 2, abs=1e-12)


def test_transition_sigma_matches_crossing():
    # Bisection on the difference of the two small-delta forms at tiny delta.
    delta = 1e-4

    def diff(sigma):
        rdg = RdgInstance.from_delta_sigma(delta, sigma)
        return simple_qsp_error_noisy(rdg, 1) - maj_error_small_delta(rdg, 1)

    lo, hi = 0.1, 1.0
    assert diff(lo) < 0 < diff(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if diff(mid) < 0:
            lo = mid
        else:
            hi = mid
    assert 0.5 * (lo + hi) == pytest.approx(transition_sigma(1), abs=1e-6)


def test_transition_sigma_asymptotic_scaling():
    # Stirling: 2^{2M}(M!)^2/(2M)! -> sqrt(pi M), so sigma^2 -> ln(pi M)/(8 M).
    m = 10**4
    ratio = transition_sigma(m) ** 2 * 8 * m / math.log(math.pi * m)
    assert ratio == pytest.approx(1.0, rel=0.01)


@pytest.mark.xfail(
    strict=True,
    reason="sigma^2 * M / ln M tends to ln(pi M)/(8 ln M) ~ 0.14 at M = 1e4, "
    "not 1; the order-of-magnitude statement sigma^2 ~ log(N)/N drops the "
    "1/8 constant (see the repository decision log)",
)
def test_transition_sigma_asymptotic_unit_ratio():
    m = 10**4
    assert transition_sigma(m) ** 2 * m / math.log(m) == pytest.approx(1.0, rel=0.2)


def test_monotonicity_in_delta_and_sigma():
    deltas = np.linspace(0.01, 1.2, 12)
    sigmas = np.linspace(0.0, 1.0, 11)
    for fn in (
        lambda r: helstrom_error_noisy(r),
        lambda r: maj_protocol_error(r, 1).error_prob,
    ):
        for s in (0.0, 0.3, 0.8):
            vals = [fn(RdgInstance.from_delta_sigma(d, s)) for d in deltas]
            assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
        for d in (0.1, 0.5):
            vals = [fn(RdgInstance.from_delta_sigma(d, s)) for s in sigmas]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# Adaptive Bayesian incoherent protocol
# ---------------------------------------------------------------------------


def test_adaptive_exact_single_shot_is_helstrom():
    rdg = RdgInstance.from_delta_sigma(0.3, 0.4)
    res = adaptive_incoherent_error_exact(rdg, 1)
    assert res.error_prob == pytest.approx(helstrom_error_noisy(rdg), abs=1e-9)


def test_adaptive_mc_single_shot_is_helstrom():
    rdg = RdgInstance.from_delta_sigma(0.3, 0.4)
    res = adaptive_incoherent_error(rdg, 1, 10**5, make_rng(31))
    assert abs(res.error_prob - helstrom_error_noisy(rdg)) <= 3 * res.std_error


def test_adaptive_beats_plain_vote():
    rdg = RdgInstance.from_delta_sigma(math.pi / 4, 0.0)
    maj = maj_protocol_error(rdg, 1).error_prob
    res = adaptive_incoherent_error(rdg, 3, 10**5, make_rng(32))
    assert res.error_prob <= maj + 3 * res.std_error


def test_adaptive_orthogonal_rotations():
    rdg = RdgInstance.from_delta_sigma(math.pi / 2, 0.0)
    assert adaptive_incoherent_error_exact(rdg, 3).error_prob == pytest.approx(
        0.0, abs=1e-9
    )
    res = adaptive_incoherent_error(rdg, 3, 10**4, make_rng(33))
    assert res.error_prob == pytest.approx(0.0, abs=1e-9)


def test_adaptive_mc_matches_exact_enumeration():
    rdg = RdgInstance.from_delta_sigma(0.5, 0.2)
    exact = adaptive_incoherent_error_exact(rdg, 3).error_prob
    res = adaptive_incoherent_error(rdg, 3, 10**5, make_rng(34))
    assert abs(res.error_prob - exact) <= 3 * res.std_error


def test_adaptive_swap_invariant():
    rdg = RdgInstance.from_delta_sigma(0.4, 0.3)
    a = adaptive_incoherent_error_exact(rdg, 3).error_prob
    b = adaptive_incoherent_error_exact(rdg.swapped(), 3).error_prob
    assert a == pytest.approx(b, abs=1e-9)
