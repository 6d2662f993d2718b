"""Discrimination protocols and their error probabilities.

Covers one-shot Helstrom discrimination, repeated measurements with a
majority vote, QSP protocols (exact noiseless, Monte Carlo noisy, and the
simple analytic family), and the adaptive Bayesian incoherent protocol.

Symmetric-error convention throughout: equal priors 1/2 / 1/2, and the
outcome-to-guess orientation is chosen per protocol to minimize the error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .noise import AngleDistribution, RdgInstance, sample_angle
from .qubit import KET0, bloch_state, is_normalized, rot_x, rot_z


@dataclass(frozen=True)
class ProtocolResult:
    error_prob: float
    std_error: float
    queries_used: int


@dataclass(frozen=True)
class QspProtocol:
    """Phase-angle lists plus preparation/measurement pairs.

    Each segment is (phases, prep, meas): a length r+1 phase list for an
    r-query coherent run, bracketed by a preparation state and a
    projective-measurement state. Segment outcomes are combined by
    majority vote when there is more than one segment.
    """

    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for phases, prep, meas in self.segments:
            if len(phases) < 1:
                raise ValueError("phase list must have length >= 1")
            if not (is_normalized(prep) and is_normalized(meas)):
                raise ValueError("prep/meas states must be unit norm")

    @property
    def n_queries(self) -> int:
        return sum(len(phases) - 1 for phases, _, _ in self.segments)

    @classmethod
    def simple(cls, n_queries: int, rdg: RdgInstance) -> "QspProtocol":
        """All-zero phases, one segment, Helstrom-optimal prep/meas."""
        alpha = helstrom_alpha(rdg, n_queries)
        prep, meas = helstrom_states(alpha)
        return cls(((np.zeros(n_queries + 1), prep, meas),))

    @classmethod
    def incoherent(cls, n_shots: int, rdg: RdgInstance) -> "QspProtocol":
        """n_shots one-query segments, each with per-shot Helstrom states."""
        alpha = helstrom_alpha(rdg, 1)
        prep, meas = helstrom_states(alpha)
        return cls(tuple((np.zeros(2), prep, meas) for _ in range(n_shots)))


def helstrom_alpha(rdg: RdgInstance, n_queries: int = 1) -> float:
    """Optimal measurement offset for an accumulated n-query rotation."""
    return math.pi / 4 - n_queries * (rdg.dist0.mu + rdg.dist1.mu) / 2


def helstrom_states(alpha: float):
    """(prep, meas) pair whose click probability is cos^2(alpha + theta).

    With prep |0> and meas on the y-z great circle at Bloch polar angle
    2*alpha, |<meas| exp(i theta sx) |prep>|^2 = cos^2(alpha + theta);
    a click is read as "guess hypothesis 0".
    """
    return KET0.copy(), bloch_state(2 * alpha, -math.pi / 2)


def helstrom_error_noiseless(delta: float) -> float:
    """Single-shot minimum error (1 - sin delta) / 2 for delta in [0, pi/2]."""
    if not 0 <= delta <= math.pi / 2:
        raise ValueError("delta must lie in [0, pi/2]; reduce it first")
    return 0.5 * (1 - math.sin(delta))


def helstrom_error_noisy(rdg: RdgInstance) -> float:
    """Single-shot error (1 - |sin delta| e^{-2 sigma^2}) / 2."""
    return 0.5 * (1 - abs(math.sin(rdg.delta)) * math.exp(-2 * rdg.sigma**2))


def majority_vote(p: float, M: int) -> float:
    """Probability the majority of 2M+1 Bernoulli(p) samples comes up.

    Fixed point at p = 1/2, amplifies p on (1/2, 1), and satisfies
    MAJ(1-p) = 1 - MAJ(p). For p below 1/2 this is the voted error of a
    process whose per-shot error is p.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must be a probability")
    if M < 0:
        raise ValueError("M must be non-negative")
    n = 2 * M + 1
    return float(
        sum(math.comb(n, k) * p ** (n - k) * (1 - p) ** k for k in range(M + 1))
    )


def maj_protocol_error(rdg: RdgInstance, M: int) -> ProtocolResult:
    """Error of 2M+1 Helstrom measurements followed by a majority vote."""
    err = majority_vote(helstrom_error_noisy(rdg), M)
    return ProtocolResult(err, 0.0, 2 * M + 1)


def qsp_unitary(phases, thetas) -> np.ndarray:
    """Alternating product e^{i phi_0 sz} prod_l (E(theta_l) e^{i phi_l sz}).

    thetas[l-1] is the angle of the l-th channel application; the factor
    written rightmost acts on the state first.
    """
    phases = np.asarray(phases, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    if len(thetas) != len(phases) - 1:
        raise ValueError("need len(thetas) == len(phases) - 1")
    u = rot_z(phases[0])
    for ell in range(1, len(phases)):
        u = u @ rot_x(thetas[ell - 1]) @ rot_z(phases[ell])
    return u


def _segment_click_prob(phases, prep, meas, thetas):
    """|<meas| Q_Phi(thetas) |prep>|^2, vectorized over leading axes.

    thetas has shape (..., r) with r = len(phases) - 1.
    """
    phases = np.asarray(phases, dtype=float)
    th = np.asarray(thetas, dtype=float)
    r = len(phases) - 1
    if th.shape[-1:] != (r,):
        raise ValueError("theta batch must have trailing length r")
    shape = th.shape[:-1]
    a0 = np.full(shape, prep[0], dtype=complex)
    a1 = np.full(shape, prep[1], dtype=complex)
    a0 = a0 * np.exp(1j * phases[r])
    a1 = a1 * np.exp(-1j * phases[r])
    for ell in range(r, 0, -1):
        t = th[..., ell - 1]
        c, s = np.cos(t), 1j * np.sin(t)
        a0, a1 = c * a0 + s * a1, s * a0 + c * a1
        a0 = a0 * np.exp(1j * phases[ell - 1])
        a1 = a1 * np.exp(-1j * phases[ell - 1])
    amp = np.conj(meas[0]) * a0 + np.conj(meas[1]) * a1
    return np.clip(np.abs(amp) ** 2, 0.0, 1.0)


def _vote_click_prob(ps):
    """P(majority of independent Bernoulli(ps) click), ties credited 1/2.

    ps has shape (..., m); the counting distribution is built by
    convolution so heterogeneous per-segment probabilities are exact.
    """
    ps = np.asarray(ps, dtype=float)
    m = ps.shape[-1]
    dist = np.ones(ps.shape[:-1] + (1,))
    for j in range(m):
        p = ps[..., j : j + 1]
        grown = np.zeros(dist.shape[:-1] + (dist.shape[-1] + 1,))
        grown[..., :-1] += dist * (1 - p)
        grown[..., 1:] += dist * p
        dist = grown
    k = np.arange(m + 1)
    out = dist[..., k > m / 2].sum(axis=-1)
    tie = k == m / 2
    if tie.any():
        out = out + 0.5 * dist[..., tie].sum(axis=-1)
    return out


def _oriented_error(v0, v1):
    """Symmetric error with the click->guess orientation chosen best."""
    e = 0.5 * ((1 - v0) + v1)  # click-majority read as "guess 0"
    return min(float(e), float(1 - e))


def qsp_error_noiseless(protocol: QspProtocol, rdg: RdgInstance) -> ProtocolResult:
    """Exact symmetric error of a QSP protocol at sigma = 0."""
    if rdg.sigma != 0:
        raise ValueError("qsp_error_noiseless requires sigma == 0")
    ps = np.empty((2, len(protocol.segments)))
    for b, mu in enumerate((rdg.dist0.mu, rdg.dist1.mu)):
        for j, (phases, prep, meas) in enumerate(protocol.segments):
            thetas = np.full(len(phases) - 1, mu)
            ps[b, j] = _segment_click_prob(phases, prep, meas, thetas)
    v0, v1 = _vote_click_prob(ps)
    return ProtocolResult(_oriented_error(v0, v1), 0.0, protocol.n_queries)


def simple_qsp_error_noiseless(delta: float, n_queries: int) -> float:
    """(1 - sin N delta) / 2, zero once delta reaches pi/N.

    Perfect discrimination is available from delta = pi/N onward; between
    pi/(2N) and pi/N the plain sine formula is returned unchanged.
    """
    if delta >= math.pi / n_queries:
        return 0.0
    return 0.5 * (1 - math.sin(n_queries * delta))


def simple_qsp_error_exact(rdg: RdgInstance, n_queries: int) -> float:
    """Exact simple-QSP error (1 - |sin N delta| e^{-2 N sigma^2}) / 2.

    The accumulated angle of an N-query zero-phase segment is Gaussian
    with mean N mu_b and variance N sigma^2, so the one-shot closed form
    applies with N delta and N sigma^2.
    """
    n = n_queries
    att = abs(math.sin(n * rdg.delta)) * math.exp(-2 * n * rdg.sigma**2)
    return 0.5 * (1 - att)


def simple_qsp_error_noisy(rdg: RdgInstance, M: int) -> float:
    """Small-delta linearized form (1 - (2M+1) delta e^{-2(2M+1) sigma^2}) / 2."""
    n = 2 * M + 1
    val = 0.5 * (1 - n * rdg.delta * math.exp(-2 * n * rdg.sigma**2))
    return min(max(val, 0.0), 1.0)


def maj_error_small_delta(rdg: RdgInstance, M: int) -> float:
    """Small-delta voted-Helstrom error with amplified slope.

    (1 - (2M+1)!/(M!)^2 2^{-2M} delta e^{-2 sigma^2}) / 2, clamped.
    """
    slope = math.exp(
        math.lgamma(2 * M + 2) - 2 * math.lgamma(M + 1) - 2 * M * math.log(2)
    )
    val = 0.5 * (1 - slope * rdg.delta * math.exp(-2 * rdg.sigma**2))
    return min(max(val, 0.0), 1.0)


def transition_sigma(M: int) -> float:
    """Noise level where the simple-QSP and voted small-delta errors cross.

    sigma = (1/2) sqrt((1/M) ln(2^{2M} (M!)^2 / (2M)!)); asymptotically
    sigma^2 ~ log(N)/N.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    log_term = 2 * M * math.log(2) + 2 * math.lgamma(M + 1) - math.lgamma(2 * M + 1)
    return 0.5 * math.sqrt(log_term / M)


def qsp_error_mc(
    protocol: QspProtocol,
    rdg: RdgInstance,
    n_trials: int,
    rng: np.random.Generator,
) -> ProtocolResult:
    """Monte Carlo symmetric error; fresh channel angles per query.

    Per trial the per-segment click probabilities are computed exactly for
    the sampled angles (the measurement outcome itself is not sampled),
    and segment outcomes are combined through an exact vote over those
    probabilities. This is the Rao-Blackwellized form of sampling outcome
    strings and has strictly smaller variance.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    vs = []
    for dist in (rdg.dist0, rdg.dist1):
        ps = np.empty((n_trials, len(protocol.segments)))
        for j, (phases, prep, meas) in enumerate(protocol.segments):
            r = len(phases) - 1
            thetas = sample_angle(dist, rng, size=(n_trials, r))
            ps[:, j] = _segment_click_prob(phases, prep, meas, thetas)
        vs.append(_vote_click_prob(ps))
    per_trial = 0.5 * ((1 - vs[0]) + vs[1])
    mean = float(per_trial.mean())
    std = float(per_trial.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    return ProtocolResult(min(mean, 1 - mean), std, protocol.n_queries)


# ---------------------------------------------------------------------------
# Adaptive Bayesian incoherent protocol
# ---------------------------------------------------------------------------


def _click_prob_analytic(d: AngleDistribution, chi: float) -> float:
    """E_theta[cos^2(chi/2 + theta)] = (1 + cos(2 mu + chi) e^{-2 sigma^2}) / 2."""
    return 0.5 * (1 + math.cos(2 * d.mu + chi) * math.exp(-2 * d.sigma**2))


def _mutual_information(chi: float, prior0: float, rdg: RdgInstance) -> float:
    pc = (_click_prob_analytic(rdg.dist0, chi), _click_prob_analytic(rdg.dist1, chi))
    priors = (prior0, 1 - prior0)
    info = 0.0
    for o in (0, 1):
        p_out = sum(priors[b] * (pc[b] if o == 0 else 1 - pc[b]) for b in (0, 1))
        for b in (0, 1):
            p_cond = pc[b] if o == 0 else 1 - pc[b]
            joint = priors[b] * p_cond
            if joint > 0 and p_out > 0:
                info += joint * math.log(p_cond / p_out)
    return info


def _best_basis(prior0: float, rdg: RdgInstance) -> float:
    """Basis angle maximizing mutual information, on the y-z great circle.

    Coarse periodic scan followed by a bounded 1-D refinement; the MI
    landscape in chi is smooth but can carry symmetric twin maxima.
    """
    grid = np.linspace(-math.pi, math.pi, 65)[:-1]
    vals = [_mutual_information(c, prior0, rdg) for c in grid]
    c0 = grid[int(np.argmax(vals))]
    h = grid[1] - grid[0]
    res = minimize_scalar(
        lambda c: -_mutual_information(c, prior0, rdg),
        bounds=(c0 - h, c0 + h),
        method="bounded",
        options={"xatol": 1e-6},
    )
    return float(res.x)


class _AdaptiveTree:
    """Measurement-basis decision tree for the adaptive protocol.

    The basis at each node depends only on the posterior reached by the
    outcome history, so the whole non-adaptive-in-theta decision structure
    can be precomputed once per (rdg, N).
    """

    def __init__(self, rdg: RdgInstance, n_queries: int):
        self.rdg = rdg
        self.nodes = {}  # history tuple -> (chi, pc0, pc1)
        self._build((), 0.5, n_queries)
        self.depth = n_queries

    def _build(self, history, prior0, remaining):
        if remaining == 0:
            return
        chi = _best_basis(prior0, self.rdg)
        pc0 = _click_prob_analytic(self.rdg.dist0, chi)
        pc1 = _click_prob_analytic(self.rdg.dist1, chi)
        self.nodes[history] = (chi, pc0, pc1)
        for outcome in (0, 1):
            l0 = pc0 if outcome == 0 else 1 - pc0
            l1 = pc1 if outcome == 0 else 1 - pc1
            total = l0 * prior0 + l1 * (1 - prior0)
            post0 = l0 * prior0 / total if total > 0 else 0.5
            self._build(history + (outcome,), post0, remaining - 1)

    def leaf_credit(self, history):
        """(credit for truth=0, credit for truth=1) of the MAP guess."""
        prior0 = 0.5
        for i, outcome in enumerate(history):
            _, pc0, pc1 = self.nodes[history[:i]]
            l0 = pc0 if outcome == 0 else 1 - pc0
            l1 = pc1 if outcome == 0 else 1 - pc1
            total = l0 * prior0 + l1 * (1 - prior0)
            prior0 = l0 * prior0 / total if total > 0 else 0.5
        if prior0 > 0.5:
            return 1.0, 0.0
        if prior0 < 0.5:
            return 0.0, 1.0
        return 0.5, 0.5


def adaptive_incoherent_error_exact(rdg: RdgInstance, n_queries: int) -> ProtocolResult:
    """Exact adaptive-protocol error by enumerating outcome histories.

    Feasible for n_queries up to ~20 (2^N histories); serves as the
    zero-variance counterpart of adaptive_incoherent_error.
    """
    tree = _AdaptiveTree(rdg, n_queries)

    def recurse(history, l0, l1):
        if len(history) == n_queries:
            c0, c1 = tree.leaf_credit(history)
            return l0 * c0, l1 * c1
        chi, pc0, pc1 = tree.nodes[history]
        s0 = s1 = 0.0
        for outcome, (q0, q1) in ((0, (pc0, pc1)), (1, (1 - pc0, 1 - pc1))):
            a, b = recurse(history + (outcome,), l0 * q0, l1 * q1)
            s0 += a
            s1 += b
        return s0, s1

    succ0, succ1 = recurse((), 1.0, 1.0)
    err = 0.5 * ((1 - succ0) + (1 - succ1))
    return ProtocolResult(err, 0.0, n_queries)


def adaptive_incoherent_error(
    rdg: RdgInstance,
    n_queries: int,
    n_trials: int,
    rng: np.random.Generator,
) -> ProtocolResult:
    """Monte Carlo error of the mutual-information adaptive protocol.

    Each trial draws a fresh channel angle per shot, measures in the
    precomputed history-dependent basis, Bayes-updates, and guesses the
    maximum-posterior hypothesis after all shots.
    """
    if n_queries < 1 or n_trials < 1:
        raise ValueError("n_queries and n_trials must be >= 1")
    tree = _AdaptiveTree(rdg, n_queries)

    success = []
    variances = []
    for dist in (rdg.dist0, rdg.dist1):
        counts = {(): n_trials}
        for _ in range(n_queries):
            next_counts = {}
            for history, n in counts.items():
                if n == 0:
                    continue
                chi = tree.nodes[history][0]
                thetas = sample_angle(dist, rng, size=n)
                p_click = 0.5 * (1 + np.cos(2 * thetas + chi))
                clicks = int((rng.random(n) < p_click).sum())
                next_counts[history + (0,)] = clicks
                next_counts[history + (1,)] = n - clicks
            counts = next_counts
        hyp_index = 0 if dist is rdg.dist0 else 1
        correct = sum(
            n * tree.leaf_credit(h)[hyp_index] for h, n in counts.items()
        )
        p_hat = correct / n_trials
        success.append(p_hat)
        variances.append(p_hat * (1 - p_hat) / n_trials)
    err = 0.5 * ((1 - success[0]) + (1 - success[1]))
    std = 0.5 * math.sqrt(sum(variances))
    return ProtocolResult(err, std, n_queries)
