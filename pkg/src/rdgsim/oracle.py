"""Independent brute-force verification backends.

Gauss-Hermite quadrature for every Gaussian expectation, exact vote-count
enumeration, and an end-to-end sample-measure-vote simulation. These back
the test suite and the `oracle dump` CLI subcommand; production error
formulas never route through them, so agreement is a genuine cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .noise import AngleDistribution, RdgInstance, sample_angle
from .protocols import QspProtocol


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int


def gauss_hermite(order: int) -> QuadratureRule:
    """Nodes/weights for integral e^{-x^2} f(x) dx, exact to degree 2*order - 1."""
    if not 2 <= order <= 128:
        raise ValueError("order must be in [2, 128]")
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    return QuadratureRule(nodes, weights, order)


def gaussian_expectation(f, d: AngleDistribution, order: int = 64) -> float:
    """E[f(theta)] for theta ~ Normal(mu, sigma^2) by change of variables."""
    rule = gauss_hermite(order)
    thetas = d.mu + math.sqrt(2) * d.sigma * rule.nodes
    return float(np.sum(rule.weights * f(thetas)) / math.sqrt(math.pi))


def helstrom_success_quadrature(
    rdg: RdgInstance, alpha: float, order: int = 64
) -> float:
    """Integral (Theta0 cos^2(a+t) + Theta1 sin^2(a+t)) / 2 dt by quadrature."""
    s0 = gaussian_expectation(lambda t: np.cos(alpha + t) ** 2, rdg.dist0, order)
    s1 = gaussian_expectation(lambda t: np.sin(alpha + t) ** 2, rdg.dist1, order)
    return 0.5 * (s0 + s1)


def helstrom_error_quadrature(rdg: RdgInstance, order: int = 64) -> float:
    """1 - max_alpha of the success integral, via scan plus golden refinement."""
    from scipy.optimize import minimize_scalar

    grid = np.linspace(-math.pi / 2, math.pi / 2, 181)
    vals = [helstrom_success_quadrature(rdg, a, order) for a in grid]
    a0 = grid[int(np.argmax(vals))]
    h = grid[1] - grid[0]
    res = minimize_scalar(
        lambda a: -helstrom_success_quadrature(rdg, a, order),
        bounds=(a0 - h, a0 + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return 1.0 + res.fun


def _tensor_click_prob(phases, prep, meas, d: AngleDistribution, order: int):
    """Expected |<meas|Q|prep>|^2 over a tensor Gauss-Hermite grid.

    Re-derives the amplitude by explicit 2x2 matrix products so the
    computation shares nothing with the production propagation code.
    """
    from .qubit import rot_x, rot_z

    r = len(phases) - 1
    rule = gauss_hermite(order)
    thetas_1d = d.mu + math.sqrt(2) * d.sigma * rule.nodes
    total = 0.0
    for idx in np.ndindex(*([order] * r)):
        u = rot_z(phases[0])
        for ell in range(1, r + 1):
            u = u @ rot_x(thetas_1d[idx[ell - 1]]) @ rot_z(phases[ell])
        amp = np.vdot(meas, u @ prep)
        w = math.prod(rule.weights[i] for i in idx)
        total += w * abs(amp) ** 2
    return total / math.pi ** (r / 2)


def _vote_majority_prob(ps) -> float:
    """P(majority click) for independent heterogeneous Bernoulli clicks.

    Exact count distribution by sequential convolution; ties (even counts)
    are credited 1/2.
    """
    dist = [1.0]
    for p in ps:
        grown = [0.0] * (len(dist) + 1)
        for k, w in enumerate(dist):
            grown[k] += w * (1 - p)
            grown[k + 1] += w * p
        dist = grown
    m = len(ps)
    out = sum(w for k, w in enumerate(dist) if k > m / 2)
    out += 0.5 * sum(w for k, w in enumerate(dist) if k == m / 2)
    return out


def expected_error_quadrature(
    protocol: QspProtocol, rdg: RdgInstance, order: int = 20
) -> float:
    """Deterministic expected symmetric error by tensor-product quadrature."""
    if protocol.n_queries > 5:
        raise ValueError("tensor quadrature limited to <= 5 total queries")
    clicks = []
    for d in (rdg.dist0, rdg.dist1):
        ps = [
            _tensor_click_prob(phases, prep, meas, d, order)
            for phases, prep, meas in protocol.segments
        ]
        clicks.append(_vote_majority_prob(ps))
    e = 0.5 * ((1 - clicks[0]) + clicks[1])
    return min(e, 1 - e)


def exhaustive_vote_error(p_shot: float, M: int) -> float:
    """Exact voted error: P(at least M+1 of 2M+1 shots wrong).

    Builds the full wrong-count distribution by convolution over shots,
    keeping every order in the underlying probability (no small-delta
    truncation), independently of the closed-form binomial sum.
    """
    if not 0 <= p_shot <= 1:
        raise ValueError("p_shot must be a probability")
    if not 0 <= M <= 20:
        raise ValueError("M must be in [0, 20]")
    n = 2 * M + 1
    dist = [1.0]
    for _ in range(n):
        grown = [0.0] * (len(dist) + 1)
        for k, w in enumerate(dist):
            grown[k] += w * (1 - p_shot)
            grown[k + 1] += w * p_shot
        dist = grown
    return sum(dist[M + 1 :])


def simulate_maj_error(
    rdg: RdgInstance, M: int, n_trials: int, rng: np.random.Generator
):
    """End-to-end sample/measure/vote Monte Carlo for the voted protocol.

    Returns (error_estimate, std_error). Each shot draws an angle, clicks
    with probability cos^2(alpha + theta) for the per-shot Helstrom
    offset, and the 2M+1 outcomes are majority voted.
    """
    n_shots = 2 * M + 1
    alpha = math.pi / 4 - (rdg.dist0.mu + rdg.dist1.mu) / 2
    wrong = []
    for b, d in enumerate((rdg.dist0, rdg.dist1)):
        thetas = sample_angle(d, rng, size=(n_trials, n_shots))
        p_click = np.cos(alpha + thetas) ** 2
        clicks = rng.random((n_trials, n_shots)) < p_click  # click => guess 0
        guess0 = clicks.sum(axis=1) > n_shots / 2
        wrong.append(guess0 != (b == 0))
    per_trial = 0.5 * (wrong[0].astype(float) + wrong[1].astype(float))
    err = float(per_trial.mean())
    std = float(per_trial.std(ddof=1) / math.sqrt(n_trials))
    return err, std


def extract_delta_slope(error_fn, delta: float = 1e-6) -> float:
    """Numerical delta-coefficient (0.5 - err(delta)) / delta near zero."""
    return (0.5 - error_fn(delta)) / delta


def dump_reference_values() -> dict:
    """Machine-checkable reference values regenerable by users."""
    from . import protocols
    from .noise import cos2_moment

    rdg = RdgInstance.from_delta_sigma(0.3, 0.4)
    vals = {
        "gauss_hermite_order2": {
            "nodes": list(gauss_hermite(2).nodes),
            "weights": list(gauss_hermite(2).weights),
        },
        "cos2_moment_mu0.2_sigma0.4": {
            "closed_form": cos2_moment(AngleDistribution(0.2, 0.4)),
            "quadrature": gaussian_expectation(
                lambda t: np.cos(2 * t), AngleDistribution(0.2, 0.4)
            ),
        },
        "helstrom_error_delta0.3_sigma0.4": {
            "closed_form": protocols.helstrom_error_noisy(rdg),
            "quadrature": helstrom_error_quadrature(rdg),
        },
        "majority_vote_p0.75_M1": {
            "closed_form": protocols.majority_vote(0.75, 1),
            "enumeration": exhaustive_vote_error(0.75, 1),
        },
        "simple_qsp3_error_delta0.1_sigma0.2": {
            "closed_form": protocols.simple_qsp_error_exact(
                RdgInstance.from_delta_sigma(0.1, 0.2), 3
            ),
            "quadrature": expected_error_quadrature(
                QspProtocol.simple(3, RdgInstance.from_delta_sigma(0.1, 0.2)),
                RdgInstance.from_delta_sigma(0.1, 0.2),
            ),
        },
    }
    return vals
