"""Increase, Decrease and Swap moves over a portfolio.

Neighbourhoods are produced as a :class:`NeighborBatch` (stacked numpy
arrays) so the tabu search can score a whole neighbourhood with one
vectorised evaluation. The single-move functions are thin wrappers over the
same row builders.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .exceptions import (
    AssetAlreadyInPortfolio,
    AssetNotInPortfolio,
    NoReplacementAvailable,
)
from .instance import Instance
from .portfolio import Constraints, Portfolio, rescale_rows


class MoveKind(IntEnum):
    INCREASE = 0
    DECREASE = 1
    SWAP = 2


@dataclass(frozen=True)
class Move:
    """What a neighbour changed.

    ``target`` is the asset increased or decreased, or the asset entering on
    a swap. ``displaced`` is the asset that left (swaps, and decreases that
    pushed an asset under ``epsilon``); ``replacement`` is the asset that
    took its place on such a decrease.
    """

    kind: MoveKind
    target: int
    displaced: int | None = None
    replacement: int | None = None


@dataclass
class NeighborBatch:
    assets: np.ndarray      # (m, k) asset ids
    weights: np.ndarray     # (m, k) feasible weights
    kinds: np.ndarray       # (m,) MoveKind values
    targets: np.ndarray     # (m,)
    displaced: np.ndarray   # (m,) -1 when nothing left
    replacement: np.ndarray  # (m,) -1 unless a decrease replaced its asset

    def __len__(self) -> int:
        return self.kinds.shape[0]

    def move(self, r: int) -> Move:
        d, rep = int(self.displaced[r]), int(self.replacement[r])
        return Move(
            MoveKind(int(self.kinds[r])),
            int(self.targets[r]),
            None if d < 0 else d,
            None if rep < 0 else rep,
        )

    def portfolio(self, r: int) -> Portfolio:
        return Portfolio(self.assets[r], self.weights[r])

    def pairs(self) -> list[tuple[Portfolio, Move]]:
        return [(self.portfolio(r), self.move(r)) for r in range(len(self))]


def _position(p: Portfolio, asset: int) -> int:
    hit = np.flatnonzero(p.assets == asset)
    if not hit.size:
        raise AssetNotInPortfolio(f"asset {asset} is not held")
    return int(hit[0])


def _complement(p: Portfolio, n: int) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[p.assets] = False
    return np.flatnonzero(mask)


_FIELDS = ("assets", "weights", "kinds", "targets", "displaced", "replacement")


def _increase_rows(p: Portfolio, positions: np.ndarray, q: float):
    """Raw (unrepaired) Increase rows."""
    m = positions.size
    assets = np.repeat(p.assets[None, :], m, axis=0)
    weights = np.repeat(p.weights[None, :], m, axis=0)
    weights[np.arange(m), positions] *= 1.0 + q
    minus = np.full(m, -1, dtype=np.intp)
    kinds = np.full(m, MoveKind.INCREASE, dtype=np.intp)
    return NeighborBatch(assets, weights, kinds, p.assets[positions], minus, minus.copy())


def _decrease_rows(
    p: Portfolio,
    positions: np.ndarray,
    q: float,
    c: Constraints,
    complement: np.ndarray,
    rng: np.random.Generator,
    skip_unreplaceable: bool,
):
    """Raw (unrepaired) Decrease rows, with replacements already drawn."""
    m = positions.size
    rows = np.arange(m)
    assets = np.repeat(p.assets[None, :], m, axis=0)
    weights = np.repeat(p.weights[None, :], m, axis=0)
    raw = weights[rows, positions] * (1.0 - q)
    weights[rows, positions] = raw
    displaced = np.full(m, -1, dtype=np.intp)
    replacement = np.full(m, -1, dtype=np.intp)
    targets = p.assets[positions]

    low = np.flatnonzero(raw < c.epsilon)
    # one candidate per Decrease row, used or not, so the stream advances
    # the same way whichever rows end up needing a replacement
    draws = complement[rng.integers(complement.size, size=m)] if complement.size else None
    if low.size:
        if complement.size == 0:
            if not skip_unreplaceable:
                raise NoReplacementAvailable(
                    f"asset {int(targets[low[0]])} fell below epsilon and every asset is held"
                )
            keep = np.ones(m, dtype=bool)
            keep[low] = False
            return NeighborBatch(
                assets[keep], weights[keep], np.full(int(keep.sum()), MoveKind.DECREASE, dtype=np.intp),
                targets[keep], displaced[keep], replacement[keep],
            )
        picks = draws[low]
        pos = positions[low]
        displaced[low] = targets[low]
        replacement[low] = picks
        assets[low, pos] = picks
        weights[low, pos] = np.maximum(raw[low], c.epsilon)

    kinds = np.full(m, MoveKind.DECREASE, dtype=np.intp)
    return NeighborBatch(assets, weights, kinds, targets, displaced, replacement)


def _repaired(batch: NeighborBatch, c: Constraints) -> NeighborBatch:
    batch.weights = rescale_rows(batch.weights, c.epsilon, c.delta)
    return batch


def lowest_weight_position(p: Portfolio) -> int:
    """Position of the smallest weight; equal weights go to the lowest asset id."""
    ties = np.flatnonzero(p.weights == p.weights.min())
    return int(ties[np.argmin(p.assets[ties])])


def _swap_rows(p: Portfolio, entering: np.ndarray):
    m = entering.size
    pos = lowest_weight_position(p)
    assets = np.repeat(p.assets[None, :], m, axis=0)
    assets[:, pos] = entering
    weights = np.repeat(p.weights[None, :], m, axis=0)
    kinds = np.full(m, MoveKind.SWAP, dtype=np.intp)
    displaced = np.full(m, p.assets[pos], dtype=np.intp)
    return NeighborBatch(
        assets, weights, kinds, entering.astype(np.intp), displaced, np.full(m, -1, np.intp)
    )


def increase_move(p: Portfolio, i: int, q: float, c: Constraints) -> tuple[Portfolio, Move]:
    """Multiply the weight of asset ``i`` by ``1 + q`` and repair."""
    batch = _repaired(_increase_rows(p, np.array([_position(p, i)]), q), c)
    return batch.portfolio(0), batch.move(0)


def decrease_move(
    p: Portfolio, i: int, q: float, c: Constraints, rng: np.random.Generator, n_assets: int
) -> tuple[Portfolio, Move]:
    """Multiply the weight of asset ``i`` by ``1 - q`` and repair.

    If the shrunk weight falls under ``epsilon`` the asset is swapped for one
    drawn uniformly from the ``n_assets - k`` assets not held, which starts from
    ``max(shrunk weight, epsilon)``.
    """
    batch = _decrease_rows(
        p, np.array([_position(p, i)]), q, c, _complement(p, n_assets), rng, skip_unreplaceable=False
    )
    return _repaired(batch, c).portfolio(0), batch.move(0)


def swap_move(p: Portfolio, j: int, c: Constraints) -> tuple[Portfolio, Move]:
    """Replace the lowest-weight asset with ``j``; the weights stay as they are."""
    if np.any(p.assets == j):
        raise AssetAlreadyInPortfolio(f"asset {j} is already held")
    batch = _swap_rows(p, np.array([j]))
    return batch.portfolio(0), batch.move(0)


def neighbor_batch(
    p: Portfolio, q: float, inst: Instance, c: Constraints, rng: np.random.Generator
) -> NeighborBatch:
    """k Increase rows, then k Decrease rows, then one Swap row per unheld asset.

    When every asset is held a Decrease that would need a replacement has
    none to draw from; such rows are left out instead of aborting the
    neighbourhood.
    """
    k = len(p)
    positions = np.arange(k)
    complement = _complement(p, inst.n)
    parts = [
        _increase_rows(p, positions, q),
        _decrease_rows(p, positions, q, c, complement, rng, skip_unreplaceable=True),
    ]
    if complement.size:
        parts.append(_swap_rows(p, complement))
    batch = NeighborBatch(
        *(np.concatenate([getattr(b, f) for b in parts]) for f in _FIELDS)
    )
    n_weight_moves = len(parts[0]) + len(parts[1])
    if c.epsilon == 0.0:
        # with a zero floor a step can wipe out all the capital; such rows
        # have no repair and are not neighbours
        dead = batch.weights[:n_weight_moves].sum(axis=1) <= 0.0
        if dead.any():
            keep = np.concatenate([~dead, np.ones(len(batch) - n_weight_moves, dtype=bool)])
            batch = NeighborBatch(*(getattr(batch, f)[keep] for f in _FIELDS))
            n_weight_moves -= int(dead.sum())
    # swap rows keep feasible weights, so repair only the first block
    batch.weights[:n_weight_moves] = rescale_rows(
        batch.weights[:n_weight_moves], c.epsilon, c.delta
    )
    return batch


def enumerate_neighbors(
    p: Portfolio, q: float, inst: Instance, c: Constraints, rng: np.random.Generator
) -> list[tuple[Portfolio, Move]]:
    return neighbor_batch(p, q, inst, c, rng).pairs()
