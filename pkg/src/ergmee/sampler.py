"""Proposal distributions, Metropolis-Hastings acceptance, and the plain
simulation loop used for network generation and standard-error estimation.

Acceptance arithmetic is done in log space throughout: edge parameters on
very sparse networks can be around -20, so linear-space exponentials are
overflow-prone.
"""

from __future__ import annotations

import hashlib
import random
import warnings
from dataclasses import dataclass
from math import exp, log

import numpy as np

from .graph import AttributeTable, Dyad, Graph, ToggleDirection
from .changestats import ChangeComputer, full_statistics
from .model import ModelSpec

#: consecutive steps pinned at an empty or complete graph before a
#: degeneracy warning is raised
DEGENERACY_STEPS = 1_000_000


class RngStream(random.Random):
    """Seedable PRNG stream; identical seed gives an identical trajectory.

    Mersenne Twister via the stdlib, which is stable across platforms and
    Python versions. ``spawn`` derives independent child streams from a
    label, so one run seed can drive several phases reproducibly.
    """

    def spawn(self, label: str) -> "RngStream":
        return RngStream(derive_seed(self.getrandbits(64), label))


def derive_seed(seed: int, label: str) -> int:
    """Deterministic child seed from (seed, label), independent of hash
    randomization."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class SimulationConfig:
    """Plain Metropolis-Hastings run settings."""

    steps: int
    burn_in: int = 0
    sample_interval: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0 or self.steps <= self.burn_in:
            raise ValueError("need steps > burn_in >= 0")
        if self.sample_interval < 1:
            raise ValueError("sample_interval must be >= 1")


class BasicProposal:
    """Uniform random dyad; direction is the flip of current presence.

    Symmetric, so the Hastings log-ratio is 0.
    """

    aux_v = 0.0
    adaptive = False

    def propose(self, g: Graph, rng) -> tuple[int, int, bool, float]:
        if g.n < 2:
            raise ValueError("need at least 2 nodes to propose a move")
        n = g.n
        i = int(rng.random() * n)
        j = int(rng.random() * (n - 1))
        if j >= i:
            j += 1
        return i, j, j not in g.adj[i], 0.0

    def reset(self, g: Graph) -> None:
        pass

    def step_aux(self, edge_count: int) -> None:
        pass


class IfdProposal:
    """Fixed-density proposal: keeps the edge count within +/-1 of a target.

    At the target count an add or a delete phase is chosen with
    probability 1/2 each; one step below the target the move must add, one step
    above it must delete. Picks are uniform over non-edges (add) or edges
    (delete), and the returned log q-ratio carries the exact asymmetric
    pick probabilities, so detailed balance holds on the constrained shell.

    An auxiliary density parameter ``aux_v`` multiplies the edge-count
    change in the acceptance exponent. When ``adaptive`` is on it is pushed
    toward balancing adds and deletes with the same sign(d)*d^2 rule the
    estimator uses for parameters; simulation freezes it after burn-in so
    samples come from a fixed distribution.
    """

    def __init__(self, target_edge_count: int, aux_step: float = 1e-3):
        if target_edge_count < 1:
            raise ValueError("IFD target edge count must be >= 1")
        if aux_step <= 0:
            raise ValueError("IFD aux_step must be > 0")
        self.target = target_edge_count
        self.aux_step = aux_step
        self.aux_v = 0.0
        self.adaptive = False

    def reset(self, g: Graph) -> None:
        if abs(g.edge_count - self.target) > 1:
            raise ValueError(
                f"IFD needs edge count within 1 of target {self.target}, "
                f"got {g.edge_count}"
            )
        if g.edge_count >= g.max_edges:
            raise ValueError("IFD target leaves no room for add moves")

    def propose(self, g: Graph, rng) -> tuple[int, int, bool, float]:
        if g.n < 2:
            raise ValueError("need at least 2 nodes to propose a move")
        e = g.edge_count
        t = self.target
        nd = g.max_edges - e  # non-edges available
        if e == t:
            if rng.random() < 0.5:
                # add: forward (1/2)(1/nd), reverse is a forced delete 1/(e+1)
                i, j = g.random_nonedge(rng)
                return i, j, True, log(2.0 * nd / (e + 1))
            # delete: forward (1/2)(1/e), reverse is a forced add 1/(nd+1)
            i, j = g.random_edge(rng)
            return i, j, False, log(2.0 * e / (nd + 1))
        if e == t - 1:
            # forced add 1/nd, reverse delete (1/2)(1/(e+1))
            i, j = g.random_nonedge(rng)
            return i, j, True, log(nd / (2.0 * (e + 1)))
        if e == t + 1:
            # forced delete 1/e, reverse add (1/2)(1/(nd+1))
            i, j = g.random_edge(rng)
            return i, j, False, log(e / (2.0 * (nd + 1)))
        raise ValueError(
            f"IFD invariant broken: edge count {e} not within 1 of target {t}"
        )

    def step_aux(self, edge_count: int) -> None:
        d = edge_count - self.target
        if d:
            self.aux_v -= self.aux_step * (d * d if d > 0 else -d * d)


ProposalKind = BasicProposal | IfdProposal


def acceptance_log_prob(
    delta: np.ndarray, theta: np.ndarray, log_q_ratio: float = 0.0
) -> float:
    """log alpha = min(0, theta . delta + log q-ratio)."""
    delta = np.asarray(delta, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if delta.shape != theta.shape:
        raise ValueError(f"length mismatch: {delta.shape} vs {theta.shape}")
    return min(0.0, float(theta @ delta) + log_q_ratio)


def mh_sweep(
    g: Graph,
    comp: ChangeComputer,
    theta: list[float],
    steps: int,
    rng,
    prop: ProposalKind,
    dz: list[float],
    boundary_streak: int = 0,
) -> tuple[int, int]:
    """Run ``steps`` Metropolis-Hastings steps in place.

    Mutates ``g`` and accumulates accepted changes into ``dz`` (never
    reset here; the caller owns its meaning). Returns the number of
    accepted moves and the updated count of consecutive steps spent at an
    empty or complete graph.

    This is the hot loop shared by the simulator and the estimator; it
    deliberately avoids numpy and per-step allocation beyond the change
    list.
    """
    n_terms = len(theta)
    propose = prop.propose
    compute = comp.compute
    uniform = rng.random
    toggle = g.toggle
    max_edges = g.max_edges
    aux_adaptive = prop.adaptive
    accepted = 0
    for _ in range(steps):
        i, j, adding, lqr = propose(g, rng)
        delta = compute(g, i, j, adding)
        s = lqr
        for k in range(n_terms):
            s += theta[k] * delta[k]
        v = prop.aux_v
        if v:
            s += v if adding else -v
        if s >= 0.0 or uniform() < exp(s):
            toggle(i, j)
            for k in range(n_terms):
                dz[k] += delta[k]
            accepted += 1
        e = g.edge_count
        if e == 0 or e == max_edges:
            boundary_streak += 1
        else:
            boundary_streak = 0
        if aux_adaptive:
            prop.step_aux(e)
    return accepted, boundary_streak


@dataclass
class SimulationResult:
    """Output of ``simulate``: thinned statistic samples and the end state."""

    samples: np.ndarray  # (n_samples, n_terms)
    final_graph: Graph
    acceptance_rate: float
    degenerate: bool
    aux_v: float = 0.0

    @property
    def sample_means(self) -> np.ndarray:
        return self.samples.mean(axis=0)


class StatisticsDriftError(RuntimeError):
    """Running statistics drifted from a from-scratch recount."""


def simulate(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    theta: np.ndarray,
    g0: Graph,
    cfg: SimulationConfig,
    kind: ProposalKind | None = None,
) -> SimulationResult:
    """Metropolis-Hastings simulation at fixed parameters.

    Statistics are tracked incrementally from accepted changes and never
    recomputed inside the loop; at the end they are checked against a full
    recount (1e-6 tolerance for accumulated float drift). Samples of the
    statistic vector are emitted every ``sample_interval`` steps after
    burn-in. ``g0`` is not modified; the chain runs on a private copy.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_terms,):
        raise ValueError(f"theta must have {spec.n_terms} entries")
    prop = kind if kind is not None else BasicProposal()
    g = g0.copy()
    prop.reset(g)
    rng = RngStream(cfg.seed)
    comp = ChangeComputer(spec, attrs)
    z0 = full_statistics(g, attrs, spec)
    theta_l = [float(v) for v in theta]
    dz = [0.0] * spec.n_terms

    if prop.adaptive and cfg.burn_in == 0 and isinstance(prop, IfdProposal):
        warnings.warn(
            "adaptive IFD with no burn-in: auxiliary parameter never settles",
            stacklevel=2,
        )

    samples: list[list[float]] = []
    accepted = 0
    streak = 0
    degenerate = False
    done = 0
    adapting = prop.adaptive
    while done < cfg.steps:
        # run to the next sampling (or burn-in) boundary
        if done < cfg.burn_in:
            chunk = cfg.burn_in - done
        else:
            chunk = min(cfg.sample_interval, cfg.steps - done)
        acc, streak = mh_sweep(g, comp, theta_l, chunk, rng, prop, dz, streak)
        accepted += acc
        done += chunk
        if done == cfg.burn_in and adapting:
            prop.adaptive = False  # freeze auxiliary parameter after burn-in
        past = done - cfg.burn_in
        if past > 0 and past % cfg.sample_interval == 0:
            samples.append([z0[k] + dz[k] for k in range(spec.n_terms)])
        if streak >= DEGENERACY_STEPS and not degenerate:
            degenerate = True
            warnings.warn(
                f"degenerate run: edge count pinned at a boundary for "
                f">{DEGENERACY_STEPS} consecutive steps",
                stacklevel=2,
            )
    if adapting:
        prop.adaptive = True  # restore caller's flag

    running = z0 + np.array(dz)
    exact = full_statistics(g, attrs, spec)
    drift = float(np.max(np.abs(running - exact))) if spec.n_terms else 0.0
    if drift > 1e-6:
        raise StatisticsDriftError(
            f"running statistics drifted {drift:.3e} from recount"
        )
    return SimulationResult(
        samples=np.array(samples) if samples else np.empty((0, spec.n_terms)),
        final_graph=g,
        acceptance_rate=accepted / cfg.steps,
        degenerate=degenerate,
        aux_v=prop.aux_v,
    )


def propose(
    kind: ProposalKind, g: Graph, rng
) -> tuple[Dyad, ToggleDirection, float]:
    """One proposal draw in public types: (dyad, direction, log q-ratio)."""
    i, j, adding, lqr = kind.propose(g, rng)
    if i > j:
        i, j = j, i
    direction = ToggleDirection.ADDED if adding else ToggleDirection.REMOVED
    return Dyad(i, j), direction, lqr
