"""Statistic terms: incremental change under one edge toggle, and slow
from-scratch evaluation.

All change functions are pure with respect to the graph and are evaluated
on the PRE-toggle state: ``adding`` is True when the edge is currently
absent and about to be added. The change for the reverse toggle, applied
immediately after, is the exact negation.

Closed forms (decay ``lam`` > 1, r = 1 - 1/lam, d_i = degree of i):

  edge          L = |E|
  alt_star      lam^2 * sum_i [r^{d_i} - 1 + d_i/lam]
  alt_triangle  lam * sum_{(i,j) in E} [1 - r^{sp_ij}],  sp = shared partners
  alt_two_path  lam * sum_{i<j} [1 - r^{tp_ij}],  tp over ALL dyads
  isolates      #{i : d_i = 0}
  activity      sum_{(i,j) in E} (a_i + a_j)        (binary attribute a)
  interaction   sum_{(i,j) in E} a_i * a_j
  mismatch      sum_{(i,j) in E} 1[c_i != c_j]      (categorical attribute c)
"""

from __future__ import annotations

import numpy as np

from .graph import AttributeTable, Dyad, Graph, ToggleDirection
from .model import (
    ACTIVITY,
    ALT_STAR,
    ALT_TRIANGLE,
    ALT_TWO_PATH,
    EDGE,
    INTERACTION,
    ISOLATES,
    MISMATCH,
    ModelSpec,
)

# integer tags for the dispatch chain in ChangeComputer.compute
_T_EDGE = 0
_T_AS = 1
_T_AT = 2
_T_A2P = 3
_T_ISO = 4
_T_ACT = 5
_T_INT = 6
_T_MIS = 7

_TAGS = {
    EDGE: _T_EDGE,
    ALT_STAR: _T_AS,
    ALT_TRIANGLE: _T_AT,
    ALT_TWO_PATH: _T_A2P,
    ISOLATES: _T_ISO,
    ACTIVITY: _T_ACT,
    INTERACTION: _T_INT,
    MISMATCH: _T_MIS,
}


class _Powers:
    """Memoized table of r^k for integer k >= 0."""

    __slots__ = ("r", "table")

    def __init__(self, r: float):
        self.r = r
        self.table = [1.0, r]

    def __call__(self, k: int) -> float:
        t = self.table
        while k >= len(t):
            t.append(t[-1] * self.r)
        return t[k]


class ChangeComputer:
    """Compiled change-vector evaluator for a fixed model.

    ``compute(g, i, j, adding)`` returns the per-term change caused by
    toggling (i, j), in model order, without touching the graph. Cost is
    O(d_i + d_j) set probes per alternating term; degree lookups and the
    common-neighbor set are shared across terms.
    """

    def __init__(self, spec: ModelSpec, attrs: AttributeTable | None = None):
        spec.validate_attributes(attrs)
        self.spec = spec
        plan = []
        for t in spec.terms:
            tag = _TAGS[t.kind]
            if t.kind in (ALT_STAR, ALT_TRIANGLE, ALT_TWO_PATH):
                lam = float(t.decay)  # type: ignore[arg-type]
                plan.append((tag, lam, _Powers(1.0 - 1.0 / lam), None))
            elif t.kind in (ACTIVITY, INTERACTION):
                plan.append((tag, 0.0, None, attrs.binary_values(t.attribute)))  # type: ignore[union-attr]
            elif t.kind == MISMATCH:
                plan.append((tag, 0.0, None, attrs.categorical_values(t.attribute)))  # type: ignore[union-attr]
            else:
                plan.append((tag, 0.0, None, None))
        self._plan = plan
        self._needs_common = any(p[0] == _T_AT for p in plan)
        # the edge/star/triangle/two-path shape is the sampling and
        # estimation workhorse; give it a fused path without the dispatch
        # loop (equivalence with the generic path is fuzz-tested)
        if [p[0] for p in plan] == [_T_EDGE, _T_AS, _T_AT, _T_A2P]:
            self._pw_as = plan[1][2]
            self._pw_at = plan[2][2]
            self._pw_a2p = plan[3][2]
            self._lam_as = plan[1][1]
            self._lam_at = plan[2][1]
            self.compute = self._compute_fused4  # type: ignore[method-assign]

    def compute(self, g: Graph, i: int, j: int, adding: bool) -> list[float]:
        adj = g.adj
        ai = adj[i]
        aj = adj[j]
        di = len(ai)
        dj = len(aj)
        common = (ai & aj) if self._needs_common else None
        sgn = 1.0 if adding else -1.0
        out = []
        for tag, lam, pw, vals in self._plan:
            if tag == _T_EDGE:
                out.append(sgn)
            elif tag == _T_AS:
                if adding:
                    out.append(lam * (2.0 - pw(di) - pw(dj)))
                else:
                    out.append(-lam * (2.0 - pw(di - 1) - pw(dj - 1)))
            elif tag == _T_AT:
                c = lam * (1.0 - pw(len(common)))
                if adding:
                    for k in common:
                        ak = adj[k]
                        c += pw(len(ai & ak)) + pw(len(aj & ak))
                else:
                    # pre-removal sp counts include the path through the
                    # toggled edge itself, hence the -1
                    for k in common:
                        ak = adj[k]
                        c += pw(len(ai & ak) - 1) + pw(len(aj & ak) - 1)
                out.append(sgn * c)
            elif tag == _T_A2P:
                c = 0.0
                if adding:
                    for k in ai:
                        if k != j:
                            c += pw(len(adj[k] & aj))
                    for k in aj:
                        if k != i:
                            c += pw(len(adj[k] & ai))
                else:
                    for k in ai:
                        if k != j:
                            c += pw(len(adj[k] & aj) - 1)
                    for k in aj:
                        if k != i:
                            c += pw(len(adj[k] & ai) - 1)
                out.append(sgn * c)
            elif tag == _T_ISO:
                if adding:
                    out.append(-float((di == 0) + (dj == 0)))
                else:
                    out.append(float((di == 1) + (dj == 1)))
            elif tag == _T_ACT:
                out.append(sgn * (vals[i] + vals[j]))
            elif tag == _T_INT:
                out.append(sgn * (vals[i] * vals[j]))
            else:  # _T_MIS
                out.append(sgn if vals[i] != vals[j] else 0.0)
        return out

    def _compute_fused4(self, g: Graph, i: int, j: int, adding: bool) -> list[float]:
        """Fused change vector for (edge, alt_star, alt_triangle,
        alt_two_path); same contract as ``compute``.

        Power tables are indexed inline (they only grow), set probes
        dominate the remaining cost.
        """
        adj = g.adj
        ai = adj[i]
        aj = adj[j]
        pw_as = self._pw_as
        pw_at = self._pw_at
        pw_a2p = self._pw_a2p
        tas = pw_as.table
        tat = pw_at.table
        ta2 = pw_a2p.table
        n_as = len(tas)
        n_at = len(tat)
        n_a2 = len(ta2)
        dec = 0 if adding else 1
        di = len(ai) - dec
        dj = len(aj) - dec
        common = ai & aj
        c_as = self._lam_as * (
            2.0
            - (tas[di] if di < n_as else pw_as(di))
            - (tas[dj] if dj < n_as else pw_as(dj))
        )
        sp = len(common)
        c_at = self._lam_at * (1.0 - (tat[sp] if sp < n_at else pw_at(sp)))
        for k in common:
            ak = adj[k]
            a = len(ai & ak) - dec
            b = len(aj & ak) - dec
            c_at += (tat[a] if a < n_at else pw_at(a)) + (
                tat[b] if b < n_at else pw_at(b)
            )
        c_a2p = 0.0
        for k in ai:
            if k != j:
                t = len(adj[k] & aj) - dec
                c_a2p += ta2[t] if t < n_a2 else pw_a2p(t)
        for k in aj:
            if k != i:
                t = len(adj[k] & ai) - dec
                c_a2p += ta2[t] if t < n_a2 else pw_a2p(t)
        if adding:
            return [1.0, c_as, c_at, c_a2p]
        return [-1.0, -c_as, -c_at, -c_a2p]


# -- single-term change functions ------------------------------------------


def _direction_flag(g: Graph, d: Dyad, direction: ToggleDirection) -> bool:
    adding = direction is ToggleDirection.ADDED
    if g.has_edge(d.i, d.j) == adding:
        raise ValueError(
            f"direction {direction.name} inconsistent with current presence of {d}"
        )
    return adding


def change_edge(g: Graph, d: Dyad, direction: ToggleDirection) -> float:
    """+1 for an addition, -1 for a removal."""
    return 1.0 if _direction_flag(g, d, direction) else -1.0


def _check_decay(lam: float) -> float:
    if lam <= 1.0:
        raise ValueError(f"decay must be > 1, got {lam}")
    return 1.0 - 1.0 / lam


def change_alt_star(g: Graph, d: Dyad, direction: ToggleDirection, lam: float) -> float:
    """Alternating-star change from the two endpoint degrees (pre-toggle)."""
    r = _check_decay(lam)
    adding = _direction_flag(g, d, direction)
    di = g.degree(d.i)
    dj = g.degree(d.j)
    if adding:
        return lam * (2.0 - r**di - r**dj)
    return -lam * (2.0 - r ** (di - 1) - r ** (dj - 1))


def change_alt_triangle(
    g: Graph, d: Dyad, direction: ToggleDirection, lam: float
) -> float:
    """Alternating-triangle change.

    Accounts for the toggled edge's own shared-partner term and for the
    shared-partner shift on edges (i,k) and (j,k) for every common
    neighbor k of the endpoints.
    """
    r = _check_decay(lam)
    adding = _direction_flag(g, d, direction)
    i, j = d
    adj = g.adj
    common = adj[i] & adj[j]
    c = lam * (1.0 - r ** len(common))
    dec = 0 if adding else 1
    for k in common:
        ak = adj[k]
        c += r ** (len(adj[i] & ak) - dec) + r ** (len(adj[j] & ak) - dec)
    return c if adding else -c


def change_alt_two_path(
    g: Graph, d: Dyad, direction: ToggleDirection, lam: float
) -> float:
    """Alternating-two-path change.

    Toggling (i,j) shifts the two-path count of dyad (k,j) for every
    k in N(i)\\{j} and of (k,i) for every k in N(j)\\{i}; the (i,j) dyad's
    own count is unaffected by its tie.
    """
    r = _check_decay(lam)
    adding = _direction_flag(g, d, direction)
    i, j = d
    adj = g.adj
    dec = 0 if adding else 1
    c = 0.0
    for k in adj[i]:
        if k != j:
            c += r ** (len(adj[k] & adj[j]) - dec)
    for k in adj[j]:
        if k != i:
            c += r ** (len(adj[k] & adj[i]) - dec)
    return c if adding else -c


def change_isolates(g: Graph, d: Dyad, direction: ToggleDirection) -> float:
    """Isolate-count change; integer in {-2, -1, 0, +1, +2}."""
    adding = _direction_flag(g, d, direction)
    di = g.degree(d.i)
    dj = g.degree(d.j)
    if adding:
        return -float((di == 0) + (dj == 0))
    return float((di == 1) + (dj == 1))


def change_attribute_term(
    g: Graph,
    attrs: AttributeTable,
    d: Dyad,
    direction: ToggleDirection,
    kind: str,
    attribute: str,
) -> float:
    """Change of an activity, interaction or mismatch term."""
    adding = _direction_flag(g, d, direction)
    sgn = 1.0 if adding else -1.0
    i, j = d
    if kind == ACTIVITY:
        a = attrs.binary_values(attribute)
        return sgn * (a[i] + a[j])
    if kind == INTERACTION:
        a = attrs.binary_values(attribute)
        return sgn * (a[i] * a[j])
    if kind == MISMATCH:
        c = attrs.categorical_values(attribute)
        return sgn if c[i] != c[j] else 0.0
    raise ValueError(f"not an attribute term kind: {kind!r}")


def change_vector(
    g: Graph,
    attrs: AttributeTable | None,
    spec: ModelSpec,
    d: Dyad,
    direction: ToggleDirection,
) -> np.ndarray:
    """Per-term changes for one toggle, in model order (pre-toggle state)."""
    adding = _direction_flag(g, d, direction)
    comp = ChangeComputer(spec, attrs)
    return np.array(comp.compute(g, d.i, d.j, adding))


# -- from-scratch evaluation -------------------------------------------------


def _two_path_counts(g: Graph) -> dict[tuple[int, int], int]:
    """tp_ij for every dyad with at least one two-path, via wedge walks."""
    counts: dict[tuple[int, int], int] = {}
    for k in range(g.n):
        nbrs = sorted(g.adj[k])
        for a_idx in range(len(nbrs)):
            i = nbrs[a_idx]
            for b_idx in range(a_idx + 1, len(nbrs)):
                j = nbrs[b_idx]
                key = (i, j)
                counts[key] = counts.get(key, 0) + 1
    return counts


def full_statistics(
    g: Graph, attrs: AttributeTable | None, spec: ModelSpec
) -> np.ndarray:
    """Evaluate every term from scratch.

    O(sum_i d_i^2) for the alternating terms; meant for initialization and
    for checking the incremental path, not for inner loops.
    """
    spec.validate_attributes(attrs)
    out = np.empty(spec.n_terms)
    tp_cache: dict[tuple[int, int], int] | None = None
    for idx, t in enumerate(spec.terms):
        kind = t.kind
        if kind == EDGE:
            out[idx] = g.edge_count
        elif kind == ALT_STAR:
            lam = t.decay
            r = 1.0 - 1.0 / lam
            out[idx] = lam * lam * sum(
                r ** len(s) - 1.0 + len(s) / lam for s in g.adj
            )
        elif kind == ALT_TRIANGLE:
            lam = t.decay
            r = 1.0 - 1.0 / lam
            out[idx] = lam * sum(
                1.0 - r ** len(g.adj[i] & g.adj[j]) for i, j in g.edges()
            )
        elif kind == ALT_TWO_PATH:
            lam = t.decay
            r = 1.0 - 1.0 / lam
            if tp_cache is None:
                tp_cache = _two_path_counts(g)
            out[idx] = lam * sum(1.0 - r**c for c in tp_cache.values())
        elif kind == ISOLATES:
            out[idx] = sum(1 for s in g.adj if not s)
        elif kind == ACTIVITY:
            a = attrs.binary_values(t.attribute)  # type: ignore[union-attr]
            out[idx] = float(sum(a[i] * len(g.adj[i]) for i in range(g.n)))
        elif kind == INTERACTION:
            a = attrs.binary_values(t.attribute)  # type: ignore[union-attr]
            out[idx] = float(sum(a[i] * a[j] for i, j in g.edges()))
        elif kind == MISMATCH:
            c = attrs.categorical_values(t.attribute)  # type: ignore[union-attr]
            out[idx] = float(sum(1 for i, j in g.edges() if c[i] != c[j]))
        else:  # pragma: no cover
            raise AssertionError(kind)
    return out


def alt_star_series(g: Graph, lam: float, max_k: int | None = None) -> float:
    """Alternating-star value via the k-star series, for cross-checking.

    sum_{k>=2} (-1)^k S_k / lam^(k-2) with S_k = sum_i C(d_i, k), counted
    directly from degrees. Only sensible on tiny graphs.
    """
    import math

    _check_decay(lam)
    degs = g.degrees()
    top = max(degs, default=0) if max_k is None else max_k
    total = 0.0
    for k in range(2, top + 1):
        s_k = sum(math.comb(d, k) for d in degs)
        total += (-1) ** k * s_k / lam ** (k - 2)
    return total
