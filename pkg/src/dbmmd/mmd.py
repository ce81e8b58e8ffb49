"""MMD coefficient matrices over the packed sample order [source | target].

Every matrix M here is (n, n) with n = n_s + n_t and is built so that for
an embedding Z (k, n), tr(Z M Z^T) measures a squared distance between
domain means:

  marginal      ||mean(Z_s) - mean(Z_t)||^2
  conditional   sum_c ||mean(Z_s^c) - mean(Z_t^c)||^2
  repulsive     sum over ordered class pairs c != r of
                ||mean(Z_a^c) - mean(Z_b^r)||^2  (a, b set by direction)

The conditional and repulsive builders need target pseudo-labels. Classes
missing on either side are skipped rather than divided by zero, so their
blocks contribute nothing.

For the repulsive matrices the printed entry rules assign the same-class
diagonal blocks once, while the rank-one expansion sum_{c != r} e e^T
accumulates them once per counterpart class. Both readings are built here
behind ``mode``: "literal" fills entries once as printed, "rank_one_sum"
accumulates and is the one that satisfies the trace identity above.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datamodel import DomainPair
from .errors import ParameterError, StateError

DIRECTIONS = ("source_to_target", "target_to_source")


def _require_pseudo(pair: DomainPair) -> np.ndarray:
    if pair.target.pseudo_labels is None:
        raise StateError("target pseudo-labels required; classify the target first")
    return pair.target.pseudo_labels


def build_marginal(pair: DomainPair) -> np.ndarray:
    """Rank-one marginal MMD matrix e e^T, e = [1/n_s .. | -1/n_t ..]."""
    ns, nt = pair.n_source, pair.n_target
    e = np.concatenate([np.full(ns, 1.0 / ns), np.full(nt, -1.0 / nt)])
    return np.outer(e, e)


def build_conditional(pair: DomainPair) -> np.ndarray:
    """Sum over classes of the per-class MMD matrices.

    Within-source block of class c gets 1/n_s^c squared, within-target
    1/n_t^c squared, the cross block -1/(n_s^c n_t^c). Same-class blocks
    never overlap across c, so the literal fill and the rank-one sum agree
    exactly here.
    """
    pseudo = _require_pseudo(pair)
    ns, n = pair.n_source, pair.n_total
    m = np.zeros((n, n))
    for c in range(pair.class_count):
        s_idx = np.flatnonzero(pair.source.labels == c)
        t_idx = np.flatnonzero(pseudo == c)
        if s_idx.size == 0 or t_idx.size == 0:
            continue
        e = np.zeros(n)
        e[s_idx] = 1.0 / s_idx.size
        e[ns + t_idx] = -1.0 / t_idx.size
        m += np.outer(e, e)
    return m


def build_repulsive(pair: DomainPair, direction: str, mode: str = "literal") -> np.ndarray:
    """Cross-class repulsive MMD matrix for one direction.

    direction "source_to_target" pairs source class c against target class
    r != c; "target_to_source" swaps the roles. With a single class there
    are no pairs and the matrix is zero in both modes.
    """
    if direction not in DIRECTIONS:
        raise ParameterError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if mode not in ("literal", "rank_one_sum"):
        raise ParameterError(f"mode must be 'literal' or 'rank_one_sum', got {mode!r}")
    pseudo = _require_pseudo(pair)
    ns, n = pair.n_source, pair.n_total
    src_of = [np.flatnonzero(pair.source.labels == c) for c in range(pair.class_count)]
    tgt_of = [ns + np.flatnonzero(pseudo == c) for c in range(pair.class_count)]
    if direction == "source_to_target":
        lead, trail = src_of, tgt_of
        lead_n, trail_n = (
            pair.source_class_counts(),
            pair.target_class_counts(),
        )
    else:
        lead, trail = tgt_of, src_of
        lead_n, trail_n = (
            pair.target_class_counts(),
            pair.source_class_counts(),
        )
    m = np.zeros((n, n))
    for c in range(pair.class_count):
        if lead_n[c] == 0:
            continue
        for r in range(pair.class_count):
            if r == c or trail_n[r] == 0:
                continue
            if mode == "rank_one_sum":
                e = np.zeros(n)
                e[lead[c]] = 1.0 / lead_n[c]
                e[trail[r]] = -1.0 / trail_n[r]
                m += np.outer(e, e)
            else:
                m[np.ix_(lead[c], lead[c])] = 1.0 / (lead_n[c] * lead_n[c])
                m[np.ix_(trail[r], trail[r])] = 1.0 / (trail_n[r] * trail_n[r])
                cross = -1.0 / (lead_n[c] * trail_n[r])
                m[np.ix_(lead[c], trail[r])] = cross
                m[np.ix_(trail[r], lead[c])] = cross
    return m


def class_cross_masks(pair: DomainPair) -> dict[int, np.ndarray]:
    """Boolean (n, n) mask per class of the cross-domain same-class positions.

    These are exactly the positions where the conditional matrix holds its
    negative entries; the compacting graph lives on their union.
    """
    pseudo = _require_pseudo(pair)
    ns, n = pair.n_source, pair.n_total
    masks: dict[int, np.ndarray] = {}
    for c in range(pair.class_count):
        s = np.zeros(n, dtype=bool)
        t = np.zeros(n, dtype=bool)
        s[np.flatnonzero(pair.source.labels == c)] = True
        t[ns + np.flatnonzero(pseudo == c)] = True
        masks[c] = np.outer(s, t) | np.outer(t, s)
    return masks


@dataclass(frozen=True)
class MmdMatrices:
    """All MMD building blocks for one pseudo-labeling of a pair."""

    marginal: np.ndarray
    conditional: np.ndarray
    repulsive_st: np.ndarray
    repulsive_ts: np.ndarray
    per_class_masks: dict[int, np.ndarray] = field(repr=False)
    cross_mask: np.ndarray = field(repr=False)

    @property
    def cg_mask(self) -> np.ndarray:
        """Cross-domain positions sharing a pseudo-class."""
        out = np.zeros_like(self.cross_mask)
        for m in self.per_class_masks.values():
            out |= m
        return out

    @property
    def sg_mask(self) -> np.ndarray:
        """Cross-domain positions with differing pseudo-classes."""
        return self.cross_mask & ~self.cg_mask


def build_all(pair: DomainPair, mode: str = "literal") -> MmdMatrices:
    """Bundle of marginal, conditional, both repulsive directions and masks."""
    ns, n = pair.n_source, pair.n_total
    is_src = np.zeros(n, dtype=bool)
    is_src[:ns] = True
    cross = np.outer(is_src, ~is_src) | np.outer(~is_src, is_src)
    return MmdMatrices(
        marginal=build_marginal(pair),
        conditional=build_conditional(pair),
        repulsive_st=build_repulsive(pair, "source_to_target", mode),
        repulsive_ts=build_repulsive(pair, "target_to_source", mode),
        per_class_masks=class_cross_masks(pair),
        cross_mask=cross,
    )
