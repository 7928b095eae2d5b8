"""Parameter estimation: contrastive-divergence seeding, gain calibration,
the equilibrium-expectation main loop, convergence ratios, and standard
errors.

The estimator drives one Markov chain. Each outer step runs ``m`` inner
Metropolis-Hastings steps, accumulating every accepted change into ``dz``
(never reset), so ``dz_A`` always equals ``z_A(x) - z_A(x_obs)``. After
each inner batch every parameter moves against its accumulated deviation:

    theta_A  <-  theta_A - K_A * sign(dz_A) * dz_A^2

which exploits the fact that the expected statistic is monotonically
increasing in its own parameter. At convergence the chain equilibrates at
parameters whose stationary distribution reproduces the observed
statistics, which is the maximum-likelihood condition for this family.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field
from math import exp, isfinite

import numpy as np

from .graph import AttributeTable, Graph
from .changestats import ChangeComputer, full_statistics
from .model import EDGE, ModelSpec
from .sampler import (
    BasicProposal,
    ProposalKind,
    RngStream,
    SimulationConfig,
    mh_sweep,
    simulate,
)

TAU_THRESHOLD = 0.1


class EstimationDivergedError(RuntimeError):
    """Parameters left the finite range during estimation."""

    def __init__(self, message: str, trace: "EstimationTrace | None" = None):
        super().__init__(message)
        self.trace = trace


class DegeneracyError(RuntimeError):
    """The chain collapsed onto a near-empty or near-complete graph."""

    def __init__(self, message: str, trace: "EstimationTrace | None" = None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class GainVector:
    """Per-term update gains K_A, all strictly positive.

    ``near_degenerate`` lists indices of terms whose statistic never moved
    during calibration; their gains are nominal and their estimates should
    not be trusted.
    """

    values: np.ndarray
    near_degenerate: tuple[int, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or not np.all(v > 0) or not np.all(np.isfinite(v)):
            raise ValueError("gains must be positive finite reals")
        object.__setattr__(self, "values", v)

    def scaled(self, factor: float) -> "GainVector":
        return GainVector(self.values * factor, self.near_degenerate)


@dataclass(frozen=True)
class EEConfig:
    """Settings for the equilibrium-expectation loop.

    ``outer_steps`` (M) parameter updates, each after ``inner_steps`` (m)
    Metropolis-Hastings steps. All gains are multiplied by ``gain_decay``
    once the outer step passes ``gain_decay_trigger`` of M, reproducing the
    coarse-then-fine two-phase schedule. The first ``burn_in_fraction`` of
    the trace is discarded for averaging and convergence ratios.
    """

    outer_steps: int
    inner_steps: int = 1000
    gain_scale: float = 1e-4
    gain_decay: float = 0.1
    gain_decay_trigger: float = 0.5
    burn_in_fraction: float = 0.5
    seed: int = 0
    max_update: float = 0.1
    backoff_patience: int = 12
    backoff_factor: float = 0.5
    plateau_threshold: float = 0.05
    stop_when_converged: bool = False
    check_interval: int | None = None
    verify_interval: int | None = None
    resync_interval: int | None = None
    se_steps: int | None = None
    compute_se: bool = True

    def __post_init__(self):
        if self.outer_steps < 1 or self.inner_steps < 1:
            raise ValueError("outer_steps and inner_steps must be >= 1")
        if self.gain_scale <= 0:
            raise ValueError("gain_scale must be > 0")
        if not 0 < self.gain_decay <= 1:
            raise ValueError("gain_decay must be in (0, 1]")
        if not 0 < self.burn_in_fraction < 1:
            raise ValueError("burn_in_fraction must be in (0, 1)")
        if not 0 < self.gain_decay_trigger <= 1:
            raise ValueError("gain_decay_trigger must be in (0, 1]")
        if self.max_update <= 0:
            raise ValueError("max_update must be > 0")
        if self.backoff_patience < 1 or not 0 < self.backoff_factor <= 1:
            raise ValueError("invalid backoff settings")


@dataclass
class EstimationTrace:
    """Per-outer-step history of the estimation run."""

    theta: np.ndarray  # (steps, terms)
    dz: np.ndarray  # (steps, terms), z(x) - z(x_obs)
    acceptance: np.ndarray  # (steps,)
    inner_steps: int
    term_names: tuple[str, ...]

    @property
    def n_steps(self) -> int:
        return self.theta.shape[0]


@dataclass
class ConvergenceReport:
    tau: np.ndarray
    tau_ok: np.ndarray
    plateau_stat: np.ndarray
    plateau_ok: np.ndarray
    converged_terms: np.ndarray
    converged: bool
    t_b: int


@dataclass
class EstimateReport:
    theta: np.ndarray
    standard_error: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    convergence: ConvergenceReport
    trace_sd: np.ndarray
    se_method: str
    term_names: tuple[str, ...]
    mean_acceptance: float


def _draw_proposals(
    g: Graph, comp: ChangeComputer, n_proposals: int, rng
) -> list[tuple[list[float], float]]:
    """Uniform-dyad proposals from a fixed state, with their change vectors.

    Kept as a list so several parameter values can be scored on common
    random proposals.
    """
    prop = BasicProposal()
    out = []
    for _ in range(n_proposals):
        i, j, adding, _ = prop.propose(g, rng)
        out.append((comp.compute(g, i, j, adding), 1.0 if adding else -1.0))
    return out


def proposal_drift(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    g: Graph,
    theta: np.ndarray,
    n_proposals: int,
    rng,
    proposals: list[tuple[list[float], float]] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of the expected accepted change per proposal.

    Returns (mean, standard error) per term of alpha * delta_z over
    uniform-dyad proposals from the fixed state ``g``. This is the
    per-step drift of each statistic; it is non-decreasing in the term's
    own parameter.
    """
    comp = ChangeComputer(spec, attrs)
    if proposals is None:
        proposals = _draw_proposals(g, comp, n_proposals, rng)
    theta = np.asarray(theta, dtype=float)
    acc = np.empty((len(proposals), spec.n_terms))
    for row, (delta, _sign) in enumerate(proposals):
        s = 0.0
        for k in range(spec.n_terms):
            s += theta[k] * delta[k]
        alpha = 1.0 if s >= 0 else exp(s)
        for k in range(spec.n_terms):
            acc[row, k] = alpha * delta[k]
    mean = acc.mean(axis=0)
    se = acc.std(axis=0, ddof=1) / np.sqrt(len(proposals))
    return mean, se


def cd1_initialize(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    x_obs: Graph,
    steps: int,
    rng,
    batch_size: int = 500,
    eta0: float = 0.4,
    max_step: float = 0.5,
    ema: float = 0.9,
) -> np.ndarray:
    """Contrastive-divergence seed estimate (one update, chain reverted).

    Proposals are drawn from the observed network, their changes accepted
    or rejected at the current parameters, and the accepted changes of each
    sub-batch drive a sign(d)*d^2 update; the network itself is never
    modified. For a dyad-independent edge model the fixed point is the
    logit of the observed density, i.e. the pseudo-likelihood estimate.

    The per-term gain is adaptive: K_A = eta_b / v_A, where v_A is an
    exponential moving average of the squared sub-batch accumulation, so a
    typical update has magnitude eta_b regardless of the statistic's scale,
    and eta_b anneals as 1/b. The returned seed is the average over the
    second half of the sub-batch trajectory, which damps the residual
    random walk around the fixed point.
    """
    if x_obs.n < 2:
        raise ValueError("observed graph needs at least 2 nodes")
    if steps < 2 * batch_size:
        raise ValueError(f"need at least {2 * batch_size} steps")
    if x_obs.edge_count == 0 or x_obs.edge_count == x_obs.max_edges:
        warnings.warn(
            "observed graph is at a density boundary; the edge estimate "
            "will diverge toward +/-inf",
            stacklevel=2,
        )
    comp = ChangeComputer(spec, attrs)
    n_terms = spec.n_terms
    prop = BasicProposal()
    theta = [0.0] * n_terms
    v = [0.0] * n_terms
    n_batches = steps // batch_size
    anneal = max(n_batches // 10, 1)
    history = np.empty((n_batches, n_terms))
    frozen_warned = False
    for b in range(n_batches):
        dz = [0.0] * n_terms
        for _ in range(batch_size):
            i, j, adding, _ = prop.propose(x_obs, rng)
            delta = comp.compute(x_obs, i, j, adding)
            s = 0.0
            for k in range(n_terms):
                s += theta[k] * delta[k]
            if s >= 0.0 or rng.random() < exp(s):
                for k in range(n_terms):
                    dz[k] += delta[k]
        eta = eta0 / (1.0 + b / anneal)
        for k in range(n_terms):
            d = dz[k]
            v[k] = ema * v[k] + (1.0 - ema) * d * d if b else d * d
            if d == 0.0:
                continue
            step = min(eta * d * d / max(v[k], 1e-12), max_step)
            theta[k] += -step if d > 0 else step
            if not isfinite(theta[k]):
                raise EstimationDivergedError(
                    f"seed estimate diverged for term {spec.labels[k]} "
                    f"at sub-batch {b}"
                )
        history[b] = theta
        if b == min(9, n_batches - 1) and not frozen_warned:
            still = [spec.labels[k] for k in range(n_terms) if v[k] == 0.0]
            if still:
                warnings.warn(
                    f"statistics never changed during early seed batches: {still}",
                    stacklevel=2,
                )
                frozen_warned = True
    return history[n_batches // 2 :].mean(axis=0)


def calibrate_gains(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    x_obs: Graph,
    theta0: np.ndarray,
    pilot_steps: int,
    rng,
    gain_scale: float = 1e-4,
    eps: float = 1e-12,
) -> GainVector:
    """Per-term gains K_A = c / max(D_A, eps)^2 from a pilot pass.

    D_A is the mean over uniform-dyad proposals from the observed network
    of alpha * (delta z_A)^2, the acceptance-weighted squared change. It is
    an upper estimate of the per-step drift derivative with respect to the
    term's own parameter, making the gains conservative. Terms whose
    statistic never changes get a nominal capped gain and are flagged
    near-degenerate.
    """
    if pilot_steps < 1000:
        raise ValueError("pilot_steps must be >= 1000")
    if gain_scale <= 0:
        raise ValueError("gain_scale must be > 0")
    theta0 = np.asarray(theta0, dtype=float)
    comp = ChangeComputer(spec, attrs)
    n_terms = spec.n_terms
    prop = BasicProposal()
    d_acc = [0.0] * n_terms
    theta_l = [float(v) for v in theta0]
    for _ in range(pilot_steps):
        i, j, adding, _ = prop.propose(x_obs, rng)
        delta = comp.compute(x_obs, i, j, adding)
        s = 0.0
        for k in range(n_terms):
            s += theta_l[k] * delta[k]
        alpha = 1.0 if s >= 0 else exp(s)
        for k in range(n_terms):
            d = delta[k]
            d_acc[k] += alpha * d * d
    d_mean = np.array(d_acc) / pilot_steps
    flagged = tuple(int(k) for k in np.flatnonzero(d_mean <= 0.0))
    if flagged:
        warnings.warn(
            "near-degenerate terms (statistic never changed in pilot): "
            f"{[spec.labels[k] for k in flagged]}; gains capped",
            stacklevel=2,
        )
    gains = gain_scale / np.maximum(d_mean, eps) ** 2
    return GainVector(gains, flagged)


def refine_gains(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    x_obs: Graph,
    theta0: np.ndarray,
    gains: GainVector,
    rng,
    kind: ProposalKind | None = None,
    pilot_outer: int = 30,
    inner_steps: int = 1000,
    target_step: float = 0.02,
) -> GainVector:
    """Rescale gains to the deviation scale of the actual chain.

    The per-proposal calibration knows nothing about how large the
    accumulated deviations dz get on a given network; on large graphs they
    reach hundreds, and K * dz^2 then overshoots by orders of magnitude.
    This pilot runs the chain from the observed network for a few inner
    batches at fixed parameters, measures each term's RMS deviation R_A,
    and caps the gain so a typical update moves the parameter by about
    ``target_step``:

        K_A  <-  min(K_A, target_step / R_A^2)

    Flags are carried through unchanged.
    """
    if pilot_outer < 2:
        raise ValueError("pilot_outer must be >= 2")
    theta0 = np.asarray(theta0, dtype=float)
    comp = ChangeComputer(spec, attrs)
    prop = kind if kind is not None else BasicProposal()
    x = x_obs.copy()
    prop.reset(x)
    n_terms = spec.n_terms
    theta_l = [float(v) for v in theta0]
    dz = [0.0] * n_terms
    sq = np.zeros(n_terms)
    streak = 0
    for _ in range(pilot_outer):
        _, streak = mh_sweep(x, comp, theta_l, inner_steps, rng, prop, dz, streak)
        for k in range(n_terms):
            sq[k] += dz[k] * dz[k]
    rms = np.sqrt(sq / pilot_outer)
    cap = target_step / np.maximum(rms, 1.0) ** 2
    return GainVector(np.minimum(gains.values, cap), gains.near_degenerate)


def tau_ratios(
    trace: EstimationTrace,
    x_obs_stats: np.ndarray,
    t_b: int,
    plateau_threshold: float = 0.05,
    tau_threshold: float = TAU_THRESHOLD,
) -> ConvergenceReport:
    """Per-term convergence ratios over the post-burn-in trace.

    tau_A is the mean of z_A - z_A(x_obs) over t > t_B divided by its
    standard deviation (the dz trace stores exactly that difference). The
    parameter plateau check fits a least-squares line through the theta
    tail and requires the slope, in trace-SD units per 1000 outer steps, to
    stay below ``plateau_threshold``; it is a heuristic guard against
    averaging a still-drifting trace.
    """
    n_steps = trace.n_steps
    if not 0 <= t_b < n_steps:
        raise ValueError(f"t_b={t_b} outside trace of {n_steps} steps")
    x_obs_stats = np.asarray(x_obs_stats, dtype=float)
    if x_obs_stats.shape != (trace.theta.shape[1],):
        raise ValueError("x_obs_stats length must match the trace width")
    tail_dz = trace.dz[t_b:]
    tail_theta = trace.theta[t_b:]
    n_tail, n_terms = tail_dz.shape

    mean = tail_dz.mean(axis=0)
    sd = tail_dz.std(axis=0)
    tau = np.empty(n_terms)
    for k in range(n_terms):
        if sd[k] > 0:
            tau[k] = mean[k] / sd[k]
        else:
            tau[k] = 0.0 if mean[k] == 0.0 else np.inf
    tau_ok = np.abs(tau) < tau_threshold

    plateau_stat = np.zeros(n_terms)
    if n_tail >= 3:
        t_idx = np.arange(n_tail) - (n_tail - 1) / 2.0
        denom = float(t_idx @ t_idx)
        theta_sd = tail_theta.std(axis=0)
        for k in range(n_terms):
            slope = float(t_idx @ (tail_theta[:, k] - tail_theta[:, k].mean())) / denom
            if theta_sd[k] > 0:
                plateau_stat[k] = abs(slope) * 1000.0 / theta_sd[k]
            else:
                plateau_stat[k] = 0.0  # exactly constant parameter
    plateau_ok = plateau_stat < plateau_threshold
    converged_terms = tau_ok & plateau_ok
    return ConvergenceReport(
        tau=tau,
        tau_ok=tau_ok,
        plateau_stat=plateau_stat,
        plateau_ok=plateau_ok,
        converged_terms=converged_terms,
        converged=bool(converged_terms.all()),
        t_b=t_b,
    )


def batch_means_se(samples: np.ndarray, n_batches: int = 20) -> np.ndarray:
    """Monte Carlo standard error of the sample mean via batch means.

    Splits the (possibly autocorrelated) sample sequence into contiguous
    batches and uses the spread of the batch means.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    n = samples.shape[0]
    if n < 2 * n_batches:
        raise ValueError(f"need at least {2 * n_batches} samples")
    size = n // n_batches
    trimmed = samples[: size * n_batches]
    means = trimmed.reshape(n_batches, size, -1).mean(axis=1)
    return means.std(axis=0, ddof=1) / np.sqrt(n_batches)


def standard_errors(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    x_final: Graph,
    theta_hat: np.ndarray,
    sim_cfg: SimulationConfig,
    rng,
    exclude: tuple[int, ...] = (),
    cond_tol: float = 1e-10,
) -> np.ndarray:
    """Asymptotic standard errors from the inverse statistic covariance.

    Simulates at the estimate, takes the covariance of thinned statistic
    samples as the Fisher information of this exponential family, and
    returns the square roots of the inverse's diagonal. Near-singular
    covariance falls back to a pseudo-inverse with a warning. Excluded
    (near-degenerate) terms get NaN and are left out of the inversion.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    cfg = dataclasses.replace(sim_cfg, seed=derive_run_seed(rng))
    res = simulate(spec, attrs, theta_hat, x_final, cfg, BasicProposal())
    if res.samples.shape[0] < 10:
        raise ValueError("too few samples for a covariance estimate")
    keep = [k for k in range(spec.n_terms) if k not in exclude]
    sub = res.samples[:, keep]
    cov = np.atleast_2d(np.cov(sub.T))
    eig = np.linalg.eigvalsh(cov)
    se = np.full(spec.n_terms, np.nan)
    if eig[0] <= cond_tol * max(eig[-1], 1.0):
        warnings.warn(
            "statistic covariance is singular (collinear terms?); "
            "using a pseudo-inverse, standard errors are unreliable",
            stacklevel=2,
        )
        inv = np.linalg.pinv(cov)
    else:
        inv = np.linalg.inv(cov)
    diag = np.sqrt(np.maximum(np.diag(inv), 0.0))
    for pos, k in enumerate(keep):
        se[k] = diag[pos]
    return se


def derive_run_seed(rng) -> int:
    """Deterministic 63-bit seed drawn from a stream."""
    return rng.getrandbits(63)


def ee_estimate(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    x_obs: Graph,
    theta0: np.ndarray,
    gains: GainVector,
    cfg: EEConfig,
    kind: ProposalKind | None = None,
    rng=None,
) -> tuple[EstimationTrace, EstimateReport]:
    """Equilibrium-expectation estimation from an observed network.

    Runs the main loop on a private copy of ``x_obs``: m inner
    Metropolis-Hastings steps per outer step, accepted changes accumulated
    into dz (so dz always equals z(x) - z(x_obs)), then the sign(d)*d^2
    parameter update, with step magnitudes clipped at ``cfg.max_update`` as
    a guard against transient deviation spikes. Records the full theta/dz
    trace, applies the one-shot gain decay, and finishes with convergence
    ratios and standard errors.

    Raises EstimationDivergedError on non-finite parameters and
    DegeneracyError when the edge count sits pinned near an empty or
    complete graph (relative to the observed density) for more than 10% of
    the outer steps; both carry the partial trace for post-mortem plots.
    """
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (spec.n_terms,):
        raise ValueError(f"theta0 must have {spec.n_terms} entries")
    if not np.all(np.isfinite(theta0)):
        raise ValueError("theta0 must be finite")
    if gains.values.shape != (spec.n_terms,):
        raise ValueError("one gain per term required")
    if rng is None:
        rng = RngStream(cfg.seed)
    prop = kind if kind is not None else BasicProposal()

    x = x_obs.copy()
    prop.reset(x)
    comp = ChangeComputer(spec, attrs)
    z_obs = full_statistics(x_obs, attrs, spec)
    n_terms = spec.n_terms
    m = cfg.inner_steps
    m_outer = cfg.outer_steps

    theta = [float(v) for v in theta0]
    k_gain = [float(v) for v in gains.values]
    dz = [0.0] * n_terms
    theta_trace = np.empty((m_outer, n_terms))
    dz_trace = np.empty((m_outer, n_terms))
    acc_trace = np.empty(m_outer)

    decay_at = int(cfg.gain_decay_trigger * m_outer)
    decayed = cfg.gain_decay == 1.0
    check_every = cfg.check_interval or max(50, m_outer // 20)
    streak = 0
    degen_streak = 0
    completed = 0
    # collapse zones: edge count pinned far from the observed density,
    # within 5% of an empty or complete graph relative to the gap
    e_obs = x_obs.edge_count
    max_edges = x_obs.max_edges
    lo_zone = e_obs // 20
    hi_zone = max_edges - (max_edges - e_obs) // 20

    def partial_trace() -> EstimationTrace:
        return EstimationTrace(
            theta=theta_trace[:completed].copy(),
            dz=dz_trace[:completed].copy(),
            acceptance=acc_trace[:completed].copy(),
            inner_steps=m,
            term_names=spec.labels,
        )

    clip = cfg.max_update
    clip_streak = [0] * n_terms
    for t in range(m_outer):
        accepted, streak = mh_sweep(x, comp, theta, m, rng, prop, dz, streak)
        for k in range(n_terms):
            d = dz[k]
            if d != 0.0:
                step = k_gain[k] * d * d
                if step > clip:
                    step = clip
                    clip_streak[k] += 1
                    # a persistently saturated update means the gain is too
                    # large for this term's deviation scale: back it off
                    if clip_streak[k] >= cfg.backoff_patience:
                        k_gain[k] *= cfg.backoff_factor
                        clip_streak[k] = 0
                else:
                    clip_streak[k] = 0
                theta[k] += -step if d > 0.0 else step
        theta_trace[t] = theta
        dz_trace[t] = dz
        acc_trace[t] = accepted / m
        completed = t + 1

        if not all(isfinite(v) for v in theta):
            raise EstimationDivergedError(
                f"non-finite parameters at outer step {t}", partial_trace()
            )
        if not decayed and completed >= decay_at:
            for k in range(n_terms):
                k_gain[k] *= cfg.gain_decay
            decayed = True
        if cfg.resync_interval and completed % cfg.resync_interval == 0:
            exact = full_statistics(x, attrs, spec) - z_obs
            for k in range(n_terms):
                dz[k] = float(exact[k])
        if cfg.verify_interval and completed % cfg.verify_interval == 0:
            exact = full_statistics(x, attrs, spec) - z_obs
            err = max(abs(dz[k] - exact[k]) for k in range(n_terms))
            if err > 1e-9:
                raise RuntimeError(
                    f"dz bookkeeping drifted by {err:.3e} at outer step {t}"
                )

        e = x.edge_count
        if e <= lo_zone or e >= hi_zone:
            degen_streak += 1
        else:
            degen_streak = 0
        if degen_streak > max(0.1 * m_outer, 2):
            kind_word = "near-complete" if e >= hi_zone else "near-empty"
            raise DegeneracyError(
                f"chain collapsed onto a {kind_word} graph "
                f"({e} edges vs {e_obs} observed) for {degen_streak} "
                "consecutive outer steps",
                partial_trace(),
            )

        if (
            cfg.stop_when_converged
            and completed >= max(20, 2 * check_every)
            and completed % check_every == 0
        ):
            t_b = int(cfg.burn_in_fraction * completed)
            rep = tau_ratios(
                partial_trace(), z_obs, t_b, cfg.plateau_threshold
            )
            if rep.converged:
                break

    trace = partial_trace()
    t_b = int(cfg.burn_in_fraction * trace.n_steps)
    report = _finalize_report(
        spec, attrs, x, trace, z_obs, t_b, cfg, rng,
        exclude=gains.near_degenerate,
    )
    return trace, report


def _finalize_report(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    x_final: Graph,
    trace: EstimationTrace,
    z_obs: np.ndarray,
    t_b: int,
    cfg: EEConfig,
    rng,
    exclude: tuple[int, ...] = (),
) -> EstimateReport:
    convergence = tau_ratios(trace, z_obs, t_b, cfg.plateau_threshold)
    tail = trace.theta[t_b:]
    theta_hat = tail.mean(axis=0)
    trace_sd = tail.std(axis=0)
    se = None
    se_method = "trace"
    if cfg.compute_se and convergence.converged:
        steps = cfg.se_steps or max(200_000, 100 * cfg.inner_steps)
        sim_cfg = SimulationConfig(
            steps=steps,
            burn_in=steps // 5,
            sample_interval=max(1, cfg.inner_steps // 2),
            seed=0,
        )
        try:
            se = standard_errors(
                spec, attrs, x_final, theta_hat, sim_cfg, rng, exclude=exclude
            )
            se_method = "fisher"
        except Exception as exc:  # fall back to the trace spread
            warnings.warn(f"standard-error simulation failed ({exc})", stacklevel=2)
            se = None
    if se is None:
        se = np.where(trace_sd > 0, trace_sd, np.nan)
    return EstimateReport(
        theta=theta_hat,
        standard_error=se,
        ci_low=theta_hat - 1.96 * se,
        ci_high=theta_hat + 1.96 * se,
        convergence=convergence,
        trace_sd=trace_sd,
        se_method=se_method,
        term_names=spec.labels,
        mean_acceptance=float(trace.acceptance.mean()) if trace.n_steps else 0.0,
    )


def post_estimation_check(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    theta_hat: np.ndarray,
    x_obs_stats: np.ndarray,
    n: int,
    sim_cfg: SimulationConfig,
    rng,
    start_density: float | None = None,
) -> np.ndarray:
    """Independent moment check: t_A = (mean z_A - z_A(x_obs)) / SD(z_A).

    Simulates from a random start (an Erdos-Renyi graph at roughly the
    observed density) rather than from the estimation end state, so it
    cross-checks the estimate the expensive way. Small |t| for every term
    means the fitted model reproduces the observed statistics.
    """
    x_obs_stats = np.asarray(x_obs_stats, dtype=float)
    if x_obs_stats.shape != (spec.n_terms,):
        raise ValueError(f"x_obs_stats must have {spec.n_terms} entries")
    if start_density is None:
        edge_idx = spec.index_of(EDGE)
        if edge_idx is not None and n > 1:
            start_density = min(0.9, x_obs_stats[edge_idx] / (n * (n - 1) / 2))
        else:
            start_density = 0.1
    g0 = random_graph(n, start_density, rng)
    cfg = dataclasses.replace(sim_cfg, seed=derive_run_seed(rng))
    res = simulate(spec, attrs, theta_hat, g0, cfg, BasicProposal())
    means = res.samples.mean(axis=0)
    sds = res.samples.std(axis=0)
    if np.any(sds == 0):
        flat = [spec.labels[k] for k in np.flatnonzero(sds == 0)]
        raise ValueError(f"zero-variance statistics in check simulation: {flat}")
    return (means - x_obs_stats) / sds


def random_graph(n: int, density: float, rng) -> Graph:
    """Graph with round(density * C(n,2)) uniformly placed edges."""
    if not 0 <= density <= 1:
        raise ValueError("density must be in [0, 1]")
    g = Graph(n)
    target = round(density * g.max_edges)
    while g.edge_count < target:
        i, j = g.random_nonedge(rng)
        g.toggle(i, j)
    return g
