"""Exact ground truth on tiny graphs by full enumeration of the state space.

For n <= 6 nodes there are at most 2^15 = 32768 undirected simple graphs,
so expectations, the normalizer, and the maximum-likelihood point can be
computed exactly. This is the independent brute-force oracle every
Monte Carlo result is validated against.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .graph import AttributeTable, Graph
from .changestats import full_statistics
from .model import ModelSpec

MAX_NODES = 6


class MleDoesNotExistError(ValueError):
    """Observed statistics on the boundary of the achievable range."""


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if n > MAX_NODES:
        raise ValueError(f"exact enumeration capped at n={MAX_NODES}, got {n}")


def enumerate_statistics(
    spec: ModelSpec, attrs: AttributeTable | None, n: int
) -> np.ndarray:
    """Statistic vectors of all 2^C(n,2) graphs, indexed by edge bitmask.

    Bit k of the mask corresponds to the k-th dyad in lexicographic order
    over combinations(range(n), 2).
    """
    _check_n(n)
    dyads = list(combinations(range(n), 2))
    n_states = 1 << len(dyads)
    z = np.empty((n_states, spec.n_terms))
    for mask in range(n_states):
        g = Graph(n)
        m = mask
        k = 0
        while m:
            if m & 1:
                i, j = dyads[k]
                g.toggle(i, j)
            m >>= 1
            k += 1
        z[mask] = full_statistics(g, attrs, spec)
    return z


class ExactDistribution:
    """The model distribution over all graphs on n <= 6 nodes.

    Keeps the per-state statistic matrix (tiny at this size) so repeated
    expectation and covariance queries, e.g. from Newton iterations, do not
    re-enumerate.
    """

    def __init__(
        self,
        spec: ModelSpec,
        attrs: AttributeTable | None,
        theta: np.ndarray,
        n: int,
    ):
        _check_n(n)
        self.spec = spec
        self.n = n
        self.z = enumerate_statistics(spec, attrs, n)
        self.set_theta(theta)

    def set_theta(self, theta: np.ndarray) -> None:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.spec.n_terms,):
            raise ValueError(f"theta must have {self.spec.n_terms} entries")
        self.theta = theta
        logw = self.z @ theta
        self.log_normalizer = _logsumexp(logw)
        self.log_probs = logw - self.log_normalizer

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def expectations(self) -> np.ndarray:
        return self.probs @ self.z

    def covariance(self) -> np.ndarray:
        p = self.probs
        mean = p @ self.z
        centered = self.z - mean
        return (centered * p[:, None]).T @ centered


def _logsumexp(x: np.ndarray) -> float:
    m = float(np.max(x))
    return m + float(np.log(np.sum(np.exp(x - m))))


def exact_expectations(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    theta: np.ndarray,
    n: int,
) -> np.ndarray:
    """E[z] under the model at theta, by weighted sum over all graphs."""
    return ExactDistribution(spec, attrs, theta, n).expectations()


def exact_mle(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    x_obs: Graph,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> np.ndarray:
    """Maximum-likelihood parameters by Newton iteration on the exact model.

    Solves E_theta[z] = z(x_obs) using the exact covariance as the
    Jacobian, with step halving on the log-likelihood. Before iterating,
    each observed statistic is required to lie strictly between its minimum
    and maximum over all graphs (a cheap necessary condition; boundary
    cases like the empty or complete graph have no MLE).
    """
    n = x_obs.n
    _check_n(n)
    z_obs = full_statistics(x_obs, attrs, spec)
    dist = ExactDistribution(spec, attrs, np.zeros(spec.n_terms), n)
    z_min = dist.z.min(axis=0)
    z_max = dist.z.max(axis=0)
    on_boundary = (z_obs <= z_min) | (z_obs >= z_max)
    if np.any(on_boundary):
        bad = [spec.labels[k] for k in np.flatnonzero(on_boundary)]
        raise MleDoesNotExistError(
            f"observed statistics on the achievable boundary for {bad}; "
            "the MLE does not exist"
        )

    theta = np.zeros(spec.n_terms)

    def loglik(th: np.ndarray) -> float:
        dist.set_theta(th)
        return float(th @ z_obs) - dist.log_normalizer

    ll = loglik(theta)
    for _ in range(max_iter):
        grad = z_obs - dist.expectations()
        if float(np.max(np.abs(grad))) < tol:
            return theta
        cov = dist.covariance()
        try:
            step = np.linalg.solve(cov, grad)
        except np.linalg.LinAlgError:
            raise MleDoesNotExistError(
                "singular statistic covariance; terms are collinear on this graph"
            ) from None
        # damped Newton: halve until the log-likelihood improves
        scale = 1.0
        for _ in range(60):
            cand = theta + scale * step
            ll_cand = loglik(cand)
            if ll_cand >= ll - 1e-12:
                theta, ll = cand, ll_cand
                break
            scale *= 0.5
        else:
            raise MleDoesNotExistError("Newton step failed to improve likelihood")
    dist.set_theta(theta)
    if float(np.max(np.abs(z_obs - dist.expectations()))) >= tol:
        raise MleDoesNotExistError("Newton did not reach the moment condition")
    return theta
