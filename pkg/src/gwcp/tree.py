"""Lazily explored Galton-Watson and augmented Galton-Watson trees.

Vertices get dense integer ids in the order they are materialised; id 0 is the
root. The *shape* of the tree does not depend on that order: every vertex
carries a 64-bit path key (a hash of its parent's key and its position among
its siblings), and its child count is a hash of ``(tree seed, key)`` pushed
through the law's inverse CDF.

In AGW mode the root draws ``X`` from the law and then receives one extra
child, the top of the attached extra GW copy. That child is the root's last
child (see :meth:`TreeStore.augment_child`).
"""

from __future__ import annotations

import bisect
import csv
from enum import Enum

import numpy as np

from .dist import OffspringDistribution, require_tree_law
from .rng import SALT_CHILD, SALT_COUNT, splitmix64, splitmix64_int, to_unit

_SALT_CHILD = int(SALT_CHILD)
_SALT_COUNT = int(SALT_COUNT)


class TreeMode(str, Enum):
    GW = "GW"
    AGW = "AGW"


class UnknownVertex(KeyError):
    pass


_UNEXPLORED = -1
_INITIAL_CAPACITY = 64


class TreeStore:
    """Growable array-backed rooted tree.

    Parameters
    ----------
    law : OffspringDistribution
        Tree law ``F_T``; must have ``p_0 = 0``.
    mode : TreeMode or str
        ``"GW"`` or ``"AGW"``.
    seed : int
        Tree seed; the shape is a deterministic function of it.
    """

    def __init__(self, law: OffspringDistribution, mode=TreeMode.AGW, seed: int = 0):
        require_tree_law(law)
        self.law = law
        self.mode = TreeMode(mode)
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        mix = splitmix64_int(self.seed)
        self._seed_int = mix
        self._seed_mix = np.uint64(mix)
        self._degenerate = len(law.support) == 1
        self._cdf_list = law._cdf.tolist()
        self._support_list = law.support.tolist()
        cap = _INITIAL_CAPACITY
        self._parent = np.full(cap, -1, dtype=np.int64)
        self._first = np.full(cap, -1, dtype=np.int64)
        self._nchild = np.full(cap, _UNEXPLORED, dtype=np.int64)
        self._depth = np.zeros(cap, dtype=np.int64)
        self._key = np.zeros(cap, dtype=np.uint64)
        # salted so the root's own count hash does not cancel the seed
        self._key[0] = splitmix64_int(mix ^ _SALT_CHILD)
        self._n = 1

    # -- storage -----------------------------------------------------------

    def __len__(self) -> int:
        return self._n

    @property
    def n_explored(self) -> int:
        return int(np.count_nonzero(self._nchild[: self._n] != _UNEXPLORED))

    def _grow(self, need: int) -> None:
        cap = len(self._parent)
        if need <= cap:
            return
        new = max(need, 2 * cap)
        extra = new - cap
        self._parent = np.concatenate([self._parent, np.full(extra, -1, dtype=np.int64)])
        self._first = np.concatenate([self._first, np.full(extra, -1, dtype=np.int64)])
        self._nchild = np.concatenate([self._nchild, np.full(extra, _UNEXPLORED, dtype=np.int64)])
        self._depth = np.concatenate([self._depth, np.zeros(extra, dtype=np.int64)])
        self._key = np.concatenate([self._key, np.zeros(extra, dtype=np.uint64)])

    def _check(self, v: int) -> int:
        v = int(v)
        if v < 0 or v >= self._n:
            raise UnknownVertex(v)
        return v

    def _draw_counts(self, keys: np.ndarray) -> np.ndarray:
        if self._degenerate:
            return np.full(len(keys), self.law.support[0], dtype=np.int64)
        with np.errstate(over="ignore"):
            bits = splitmix64(keys ^ self._seed_mix ^ SALT_COUNT)
        return self.law.ppf(to_unit(bits)).astype(np.int64)

    def _explore_one(self, v: int) -> None:
        """Scalar twin of :meth:`explore`; produces bit-identical keys."""
        key = int(self._key[v])
        if self._degenerate:
            k = self._support_list[0]
        else:
            bits = splitmix64_int(key ^ self._seed_int ^ _SALT_COUNT)
            u = (bits >> 11) * (1.0 / 9007199254740992.0)
            i = bisect.bisect_right(self._cdf_list, u)
            k = self._support_list[min(i, len(self._support_list) - 1)]
        if v == 0 and self.mode is TreeMode.AGW:
            k += 1
        start = self._n
        self._grow(start + k)
        self._first[v] = start
        self._nchild[v] = k
        self._parent[start : start + k] = v
        self._depth[start : start + k] = self._depth[v] + 1
        self._key[start : start + k] = [
            splitmix64_int(key ^ _SALT_CHILD ^ (j + 1)) for j in range(k)
        ]
        self._n = start + k

    def explore(self, vs) -> None:
        """Materialise the children of every unexplored vertex in ``vs``."""
        if isinstance(vs, (int, np.integer)) or (isinstance(vs, list) and len(vs) == 1):
            v = int(vs if isinstance(vs, (int, np.integer)) else vs[0])
            if 0 <= v < self._n:
                if self._nchild[v] == _UNEXPLORED:
                    self._explore_one(v)
                return
        vs = np.asarray(vs, dtype=np.int64).ravel()
        if vs.size == 0:
            return
        if vs.min() < 0 or vs.max() >= self._n:
            raise UnknownVertex(int(vs[(vs < 0) | (vs >= self._n)][0]))
        todo = vs[self._nchild[vs] == _UNEXPLORED]
        if todo.size == 0:
            return
        todo = np.unique(todo)
        counts = self._draw_counts(self._key[todo])
        if self.mode is TreeMode.AGW:
            counts = counts + (todo == 0)
        total = int(counts.sum())
        start = self._n
        self._grow(start + total)
        offsets = start + np.concatenate([[0], np.cumsum(counts)[:-1]])
        self._first[todo] = offsets
        self._nchild[todo] = counts
        new_ids = np.arange(start, start + total, dtype=np.int64)
        parents = np.repeat(todo, counts)
        rank = new_ids - np.repeat(offsets, counts)
        self._parent[new_ids] = parents
        self._depth[new_ids] = self._depth[parents] + 1
        with np.errstate(over="ignore"):
            self._key[new_ids] = splitmix64(
                self._key[parents] ^ SALT_CHILD ^ (rank.astype(np.uint64) + np.uint64(1))
            )
        self._n = start + total

    # -- scalar queries ----------------------------------------------------

    def children(self, v: int) -> list[int]:
        v = self._check(v)
        if self._nchild[v] == _UNEXPLORED:
            self._explore_one(v)
        f = int(self._first[v])
        return list(range(f, f + int(self._nchild[v])))

    def child_count(self, v: int) -> int:
        v = self._check(v)
        if self._nchild[v] == _UNEXPLORED:
            self._explore_one(v)
        return int(self._nchild[v])

    def parent(self, v: int):
        v = self._check(v)
        p = int(self._parent[v])
        return None if p < 0 else p

    def degree(self, v: int) -> int:
        return self.child_count(v) + (1 if self._check(v) != 0 else 0)

    def depth(self, v: int) -> int:
        return int(self._depth[self._check(v)])

    def neighbors(self, v: int) -> list[int]:
        """Neighbours in canonical order: parent first (if any), then children."""
        kids = self.children(v)
        p = self.parent(v)
        return kids if p is None else [p] + kids

    def neighbor(self, v: int, j: int) -> int:
        """The ``j``-th neighbour of ``v`` in :meth:`neighbors` order; ``v`` must be explored."""
        if v == 0:
            return int(self._first[0]) + j
        if j == 0:
            return int(self._parent[v])
        return int(self._first[v]) + j - 1

    def augment_child(self):
        """Root's extra child in AGW mode, else ``None``."""
        if self.mode is not TreeMode.AGW:
            return None
        kids = self.children(0)
        return kids[-1]

    def path_key(self, v: int) -> int:
        return int(self._key[self._check(v)])

    # -- vectorised queries ------------------------------------------------

    def degrees(self, vs: np.ndarray) -> np.ndarray:
        vs = np.asarray(vs, dtype=np.int64)
        self.explore(vs)
        return self._nchild[vs] + (vs != 0)

    def depths(self, vs: np.ndarray) -> np.ndarray:
        return self._depth[np.asarray(vs, dtype=np.int64)]

    def random_neighbors(self, vs: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Neighbour ``floor(u * degree)`` of each vertex in ``vs`` (canonical order)."""
        vs = np.asarray(vs, dtype=np.int64)
        deg = self.degrees(vs)
        j = np.minimum((u * deg).astype(np.int64), deg - 1)
        nonroot = vs != 0
        out = self._first[vs] + j - nonroot
        to_parent = nonroot & (j == 0)
        out[to_parent] = self._parent[vs[to_parent]]
        return out

    # -- export ------------------------------------------------------------

    def rows(self):
        """``(vertex_id, parent_id, depth, child_count)`` for explored vertices."""
        for v in range(self._n):
            n = int(self._nchild[v])
            if n == _UNEXPLORED:
                continue
            p = int(self._parent[v])
            yield v, ("" if p < 0 else p), int(self._depth[v]), n

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["vertex_id", "parent_id", "depth", "child_count"])
            w.writerows(self.rows())

    def canonical_shape(self, max_depth: int) -> dict[tuple, int]:
        """Child counts keyed by sibling-index path, exploring down to ``max_depth``.

        Independent of vertex-id assignment order; used to compare trees.
        """
        out = {}
        stack = [(0, ())]
        while stack:
            v, path = stack.pop()
            kids = self.children(v)
            out[path] = len(kids)
            if len(path) < max_depth:
                stack.extend((c, path + (i,)) for i, c in enumerate(kids))
        return out


def new_tree(law: OffspringDistribution, mode=TreeMode.AGW, seed: int = 0) -> TreeStore:
    return TreeStore(law, mode, seed)
