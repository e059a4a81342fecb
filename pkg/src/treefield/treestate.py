"""Vacuum functional of tree tensor-network states.

The engine ascends operators caret by caret: children (A, B) fuse to
V^dag (A (x) B) V, and the root wire closes with the normalised trace,
omega(M) = (1/d) tr(Phi(t)^dag M Phi(t)).  Cost is polynomial in the leaf
count; `oracle_expectation` is the only full-state path and is hard capped.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .dyadic import BinaryTree, StdInterval, tree_to_partition
from .fusion import fuse_batch
from .spectral import Isometry3Box, build_channel

ORACLE_CAP_DEFAULT = 1 << 20
ORACLE_CAP_ENV = "TREEFIELD_ORACLE_CAP"


def oracle_cap() -> int:
    return int(os.environ.get(ORACLE_CAP_ENV, ORACLE_CAP_DEFAULT))


@dataclass(frozen=True)
class LabelledTree:
    """Binary tree with optional leaf operators (absent leaf = identity).

    `leaf_intervals` carries the geometric labels; it defaults to the tree's
    own partition and is bookkeeping only -- contraction ignores it.
    """

    tree: BinaryTree
    leaf_ops: Dict[int, np.ndarray] = field(default_factory=dict)
    leaf_intervals: Optional[Tuple[StdInterval, ...]] = None

    def __post_init__(self):
        n = self.tree.leaf_count()
        for idx in self.leaf_ops:
            if not 0 <= idx < n:
                raise ValueError(f"leaf index {idx} out of range for {n} leaves")
        if self.leaf_intervals is not None and len(self.leaf_intervals) != n:
            raise ValueError("leaf label count does not match leaf count")

    def intervals(self) -> Tuple[StdInterval, ...]:
        if self.leaf_intervals is not None:
            return self.leaf_intervals
        return tree_to_partition(self.tree).intervals


def _check_dims(ops: Dict[int, np.ndarray], d: int):
    for idx, op in ops.items():
        if np.asarray(op).shape[-2:] != (d, d):
            raise ValueError(
                f"dimension mismatch: op at leaf {idx} is {np.asarray(op).shape}, d={d}")


def _batch_size(leaf_ops: Dict[int, np.ndarray]) -> int:
    sizes = {np.asarray(op).shape[0] for op in leaf_ops.values()}
    if len(sizes) > 1:
        raise ValueError("inconsistent batch sizes")
    return sizes.pop() if sizes else 1


def ascend_to_root(tree: BinaryTree, V: Isometry3Box,
                   leaf_ops: Dict[int, np.ndarray]) -> Optional[np.ndarray]:
    """Fused operator batch at the tree's root wire (None = identity)."""
    d = V.d
    T = V.tensor
    B = _batch_size(leaf_ops)
    eye = np.broadcast_to(np.eye(d, dtype=complex), (B, d, d))

    def rec(node: BinaryTree, offset: int) -> Tuple[Optional[np.ndarray], int]:
        if node.is_leaf():
            op = leaf_ops.get(offset)
            if op is None:
                return None, 1
            return np.asarray(op, dtype=complex), 1
        lv, nl = rec(node.left, offset)
        rv, nr = rec(node.right, offset + nl)
        if lv is None and rv is None:
            return None, nl + nr
        if lv is None:
            lv = eye
        if rv is None:
            rv = eye
        return fuse_batch(T, lv, rv), nl + nr

    root, _ = rec(tree, 0)
    return root


def vacuum_expectation_batch(tree: BinaryTree, V: Isometry3Box,
                             leaf_ops: Dict[int, np.ndarray]) -> np.ndarray:
    """Engine over a batch: each op has shape (B, d, d); returns (B,) values."""
    B = _batch_size(leaf_ops)
    root = ascend_to_root(tree, V, leaf_ops)
    if root is None:
        return np.ones(B, dtype=complex)
    return np.trace(root, axis1=1, axis2=2) / V.d


def vacuum_expectation(t: LabelledTree, V: Isometry3Box) -> complex:
    """omega of the labelled tree: fuse bottom-up, close the root with (1/d) tr."""
    _check_dims(t.leaf_ops, V.d)
    ops = {i: np.asarray(op, dtype=complex)[None, :, :] for i, op in t.leaf_ops.items()}
    return complex(vacuum_expectation_batch(t.tree, V, ops)[0])


def pair_vacuum_expectation_batch(tree: BinaryTree, V: Isometry3Box,
                                  leaf_ops: Dict[int, np.ndarray]) -> np.ndarray:
    """Expectation in the pair-rooted state: the top caret holds the
    maximally entangled pair (1/sqrt d) sum |jj>, every other caret is V.

    This is the direct-limit vacuum vector itself; it differs from the
    closed-root functional by how the top caret is closed.
    """
    d = V.d
    B = _batch_size(leaf_ops)
    if tree.is_leaf():
        return vacuum_expectation_batch(tree, V, leaf_ops)
    nl = tree.left.leaf_count()
    left_ops = {i: op for i, op in leaf_ops.items() if i < nl}
    right_ops = {i - nl: op for i, op in leaf_ops.items() if i >= nl}
    A = ascend_to_root(tree.left, V, left_ops)
    Bv = ascend_to_root(tree.right, V, right_ops)
    if A is None and Bv is None:
        return np.ones(B, dtype=complex)
    if A is None:
        return np.trace(Bv, axis1=1, axis2=2) / d
    if Bv is None:
        return np.trace(A, axis1=1, axis2=2) / d
    # <Omega_2| A (x) B |Omega_2> = (1/d) sum_{jk} A_{jk} B_{jk}
    return np.einsum("bjk,bjk->b", A, Bv) / d


def pair_vacuum_expectation(t: LabelledTree, V: Isometry3Box) -> complex:
    _check_dims(t.leaf_ops, V.d)
    ops = {i: np.asarray(op, dtype=complex)[None, :, :] for i, op in t.leaf_ops.items()}
    return complex(pair_vacuum_expectation_batch(t.tree, V, ops)[0])


# ---------------------------------------------------------------------------
# brute-force oracle


def isometry_matrix(tree: BinaryTree, V: Isometry3Box,
                    cap: Optional[int] = None) -> np.ndarray:
    """Phi(t) as a dense (d^leaves, d) matrix (every caret replaced by V)."""
    d = V.d
    n = tree.leaf_count()
    limit = oracle_cap() if cap is None else cap
    if d ** n > limit:
        raise ValueError(f"oracle size exceeded: d^{n} = {d ** n} > cap {limit}")
    T = V.tensor

    def rec(node: BinaryTree) -> np.ndarray:
        if node.is_leaf():
            return np.eye(d, dtype=complex)
        L = rec(node.left)
        R = rec(node.right)
        tmp = np.tensordot(L, T, axes=(1, 0))        # (X, q, l)
        M = np.tensordot(tmp, R, axes=(1, 1))        # (X, l, Y)
        return M.transpose(0, 2, 1).reshape(-1, d)

    return rec(tree)


def apply_leaf_ops(phi: np.ndarray, n_leaves: int, d: int,
                   leaf_ops: Dict[int, np.ndarray]) -> np.ndarray:
    """Apply (x)_j O_j (identity where absent) to each column of Phi."""
    S = phi.reshape((d,) * n_leaves + (phi.shape[1],))
    for idx, op in leaf_ops.items():
        S = np.moveaxis(np.tensordot(np.asarray(op, dtype=complex), S, axes=(1, idx)),
                        0, idx)
    return S.reshape(phi.shape)


def oracle_expectation(t: LabelledTree, V: Isometry3Box,
                       cap: Optional[int] = None) -> complex:
    """(1/d) sum_i <Phi(t) i| M |Phi(t) i> by materialising the full state."""
    _check_dims(t.leaf_ops, V.d)
    phi = isometry_matrix(t.tree, V, cap=cap)
    n = t.tree.leaf_count()
    S = apply_leaf_ops(phi, n, V.d, t.leaf_ops)
    return complex(np.vdot(phi, S) / V.d)


# ---------------------------------------------------------------------------
# forests


@dataclass(frozen=True)
class Forest:
    """Ordered trees mapping a coarse partition's leaves to a fine partition's."""

    trees: Tuple[BinaryTree, ...]

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if not self.trees:
            raise ValueError("empty forest")

    def fine_leaf_count(self) -> int:
        return sum(t.leaf_count() for t in self.trees)

    def locate(self, leaf_index: int) -> Tuple[int, int]:
        """(tree index, depth of that leaf in its tree)."""
        off = 0
        for ti, tr in enumerate(self.trees):
            n = tr.leaf_count()
            if leaf_index < off + n:
                return ti, _leaf_depth(tr, leaf_index - off)
            off += n
        raise ValueError(f"leaf {leaf_index} not in forest")


def _leaf_depth(tree: BinaryTree, leaf_index: int) -> int:
    node = tree
    depth = 0
    idx = leaf_index
    while not node.is_leaf():
        nl = node.left.leaf_count()
        if idx < nl:
            node = node.left
        else:
            node = node.right
            idx -= nl
        depth += 1
    if idx != 0:
        raise ValueError("leaf index out of range")
    return depth


def ascend_through_forest(op: np.ndarray, forest: Forest, leaf_index: int,
                          V: Isometry3Box) -> Tuple[int, np.ndarray]:
    """Conjugation of a single-leaf operator by the forest isometry.

    Eigen-operators come back unchanged with the accumulated lambda power
    (one per caret passed); anything else gets the channel applied that many
    times and power 0.
    """
    op = np.asarray(op, dtype=complex)
    _, depth = forest.locate(leaf_index)
    E = build_channel(V)
    Eop = E.apply(op)
    norm2 = np.vdot(op, op)
    lam = complex(np.vdot(op, Eop) / norm2)
    if np.linalg.norm(Eop - lam * op) <= 1e-10 * max(1.0, np.linalg.norm(op)):
        return depth, op
    out = op
    for _ in range(depth):
        out = E.apply(out)
    return 0, out


# ---------------------------------------------------------------------------
# transformed vacuum (shape evaluated with relabeled leaves)


def transformed_expectation(shape: BinaryTree,
                            image_labels: Sequence[StdInterval],
                            leaf_ops: Dict[int, np.ndarray],
                            V: Isometry3Box) -> complex:
    """omega over `shape` with operators attached at labelled leaves.

    The labels name the image intervals each leaf represents after a
    Thompson reparameterisation; with the natural labels this is exactly
    vacuum_expectation.
    """
    t = LabelledTree(shape, dict(leaf_ops), tuple(image_labels))
    return vacuum_expectation(t, V)


# ---------------------------------------------------------------------------
# serialization


def labelled_tree_to_document(t: LabelledTree) -> dict:
    from .spectral import complex_array_to_lists

    def nested(node: BinaryTree):
        if node.is_leaf():
            return 0
        return [nested(node.left), nested(node.right)]

    return {
        "tree": nested(t.tree),
        "leaf_intervals": [str(iv) for iv in t.intervals()],
        "leaf_ops": {str(i): complex_array_to_lists(op) for i, op in t.leaf_ops.items()},
    }


def labelled_tree_from_document(doc: dict) -> LabelledTree:
    from .spectral import complex_array_from_lists

    def denest(obj):
        if obj == 0:
            return BinaryTree()
        l, r = obj
        return BinaryTree(denest(l), denest(r))

    tree = denest(doc["tree"])
    ops = {int(k): complex_array_from_lists(v) for k, v in doc.get("leaf_ops", {}).items()}
    ivs = tuple(StdInterval.parse(s) for s in doc["leaf_intervals"])
    return LabelledTree(tree, ops, ivs)
