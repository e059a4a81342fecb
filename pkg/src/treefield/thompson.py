"""Thompson's groups F and T as reduced tree-pair fractions with an exact
piecewise-linear map view.

An element maps its domain partition onto its range partition, leaf i to
leaf (i + rotation) mod n; rotation 0 gives F.  Composition, inversion and
reduction all route through the exact piecewise form, so reduced pairs are
canonical: equal group elements have identical reduced fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from . import treestate
from .dyadic import (LEAF, MAX_LEVEL, BinaryTree, DyadicPartition,
                     DyadicRational, PointLike, StdInterval, caret,
                     common_refinement, is_refinement, partition_to_tree,
                     regular_partition, tree_to_partition, _as_fraction)
from .spectral import Isometry3Box, eigendecompose, build_channel


# ---------------------------------------------------------------------------
# piecewise-linear view


@dataclass(frozen=True)
class PLPiece:
    """Affine piece f(t) = y + 2^c (t - x) for t in [x, next piece's x)."""

    x: Fraction
    y: Fraction
    c: int


def _is_dyadic(q: Fraction) -> bool:
    return q.denominator & (q.denominator - 1) == 0


@dataclass(frozen=True)
class PiecewiseLinearMap:
    """Orientation-preserving PL bijection of the circle [0,1) with dyadic
    breakpoints and power-of-two slopes; values are taken mod 1."""

    pieces: Tuple[PLPiece, ...]

    def __post_init__(self):
        ps = tuple(self.pieces)
        if not ps or ps[0].x != 0:
            raise ValueError("not a Thompson map: pieces must start at 0")
        widths = []
        for i, p in enumerate(ps):
            if not (0 <= p.x < 1 and 0 <= p.y < 1):
                raise ValueError("not a Thompson map: data outside [0,1)")
            if not _is_dyadic(p.x) or not _is_dyadic(p.y):
                raise ValueError("not a Thompson map: non-dyadic breakpoint")
            nxt = ps[i + 1].x if i + 1 < len(ps) else Fraction(1)
            if nxt <= p.x:
                raise ValueError("not a Thompson map: breakpoints not increasing")
            widths.append((nxt - p.x) * Fraction(2) ** p.c)
        if sum(widths) != 1:
            raise ValueError("not a Thompson map: image does not cover the circle")
        # continuity mod 1 between consecutive pieces (values wrap on the circle)
        for i in range(len(ps)):
            p = ps[i]
            nxt_x = ps[i + 1].x if i + 1 < len(ps) else Fraction(1)
            end = p.y + (nxt_x - p.x) * Fraction(2) ** p.c
            start_next = ps[(i + 1) % len(ps)].y
            if (end - start_next) % 1 != 0:
                raise ValueError("not a Thompson map: discontinuous")
        # canonical form: merge junctions where the slope does not change
        merged: List[PLPiece] = [ps[0]]
        for p in ps[1:]:
            if p.c == merged[-1].c:
                continue  # continuity already checked, the affine run extends
            merged.append(p)
        object.__setattr__(self, "pieces", tuple(merged))

    @property
    def breakpoints(self) -> Tuple[Fraction, ...]:
        return tuple(p.x for p in self.pieces)

    @property
    def slopes(self) -> Tuple[int, ...]:
        return tuple(p.c for p in self.pieces)

    def fixes_zero(self) -> bool:
        return self.pieces[0].y == 0

    def piece_at(self, x: Fraction) -> PLPiece:
        ps = self.pieces
        lo, hi = 0, len(ps) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if ps[mid].x <= x:
                lo = mid
            else:
                hi = mid - 1
        return ps[lo]

    def __call__(self, x: PointLike) -> Fraction:
        v = _as_fraction(x)
        if not 0 <= v < 1:
            v = v % 1
        p = self.piece_at(v)
        return (p.y + (v - p.x) * Fraction(2) ** p.c) % 1

    def inverse(self) -> "PiecewiseLinearMap":
        inv = []
        for i, p in enumerate(self.pieces):
            nxt = self.pieces[i + 1].x if i + 1 < len(self.pieces) else Fraction(1)
            width = nxt - p.x
            img_w = width * Fraction(2) ** p.c
            y0 = p.y
            # the image may wrap past 1; split it at the wrap point
            if y0 + img_w <= 1:
                inv.append(PLPiece(y0, p.x, -p.c))
            else:
                inv.append(PLPiece(y0, p.x, -p.c))
                cut = p.x + (1 - y0) * Fraction(2) ** (-p.c)
                inv.append(PLPiece(Fraction(0), cut % 1, -p.c))
        inv.sort(key=lambda q: q.x)
        merged: List[PLPiece] = []
        for q in inv:
            if merged and merged[-1].x == q.x:
                raise ValueError("not a Thompson map: image pieces overlap")
            merged.append(q)
        return PiecewiseLinearMap(tuple(merged))

    def compose(self, other: "PiecewiseLinearMap") -> "PiecewiseLinearMap":
        """self after other: x -> self(other(x))."""
        cuts = {Fraction(0)}
        cuts.update(p.x for p in other.pieces)
        inv_other = other.inverse()
        for p in self.pieces:
            cuts.add(inv_other(p.x))
        xs = sorted(cuts)
        pieces = []
        for x in xs:
            y_mid = other(x)
            p1 = other.piece_at(x)
            p2 = self.piece_at(y_mid)
            value = (p2.y + (y_mid - p2.x) * Fraction(2) ** p2.c) % 1
            pieces.append(PLPiece(x, value, p1.c + p2.c))
        return PiecewiseLinearMap(tuple(pieces))


# ---------------------------------------------------------------------------
# tree-pair fractions


@dataclass(frozen=True)
class ThompsonElement:
    """Tree pair (domain, range) with a leaf rotation; maps domain leaf i
    onto range leaf (i + rotation) mod n."""

    domain_tree: BinaryTree
    range_tree: BinaryTree
    rotation: int = 0

    def __post_init__(self):
        n = self.domain_tree.leaf_count()
        if self.range_tree.leaf_count() != n:
            raise ValueError("leaf counts differ between domain and range trees")
        object.__setattr__(self, "rotation", self.rotation % n)

    @property
    def n_leaves(self) -> int:
        return self.domain_tree.leaf_count()

    def domain_partition(self) -> DyadicPartition:
        return tree_to_partition(self.domain_tree)

    def range_partition(self) -> DyadicPartition:
        return tree_to_partition(self.range_tree)

    def image_interval(self, i: int) -> StdInterval:
        return self.range_partition()[(i + self.rotation) % self.n_leaves]

    def in_f(self) -> bool:
        return self.rotation == 0

    def is_identity(self) -> bool:
        e = reduce(self)
        return e.n_leaves == 1

    def inverse(self) -> "ThompsonElement":
        return ThompsonElement(self.range_tree, self.domain_tree,
                               (-self.rotation) % self.n_leaves)

    def __call__(self, x: PointLike) -> Fraction:
        return to_piecewise(self)(x)


IDENTITY = ThompsonElement(LEAF, LEAF, 0)


def to_piecewise(e: ThompsonElement) -> PiecewiseLinearMap:
    dom = e.domain_partition()
    ran = e.range_partition()
    pieces = []
    for i, d_iv in enumerate(dom):
        r_iv = ran[(i + e.rotation) % e.n_leaves]
        pieces.append(PLPiece(d_iv.left, r_iv.left, d_iv.level - r_iv.level))
    return PiecewiseLinearMap(tuple(pieces))


def from_piecewise(m: PiecewiseLinearMap, max_level: int = MAX_LEVEL) -> ThompsonElement:
    """Reduced tree pair of a valid map: the coarsest domain partition on
    which the map is affine with standard dyadic images."""

    def admissible(a: int, l: int) -> bool:
        left = Fraction(a, 1 << l)
        right = Fraction(a + 1, 1 << l)
        p = m.piece_at(left)
        nxt_idx = m.pieces.index(p) + 1
        nxt = m.pieces[nxt_idx].x if nxt_idx < len(m.pieces) else Fraction(1)
        if right > nxt:
            return False  # straddles a breakpoint
        y = m(left)
        img_w = Fraction(1, 1 << l) * Fraction(2) ** p.c
        if y + img_w > 1:
            return False  # image wraps inside the interval
        return (y / img_w).denominator == 1  # image left endpoint aligned

    def build(a: int, l: int) -> BinaryTree:
        if admissible(a, l):
            return LEAF
        if l >= max_level:
            raise ValueError("not a Thompson map: no dyadic domain tree found")
        return BinaryTree(build(2 * a, l + 1), build(2 * a + 1, l + 1))

    dom_tree = build(0, 0)
    dom = tree_to_partition(dom_tree)
    images = []
    for i, iv in enumerate(dom):
        y = m(iv.left)
        c = m.piece_at(iv.left).c
        lvl = iv.level - c
        images.append((StdInterval(int(y * (1 << lvl)), lvl), i))
    ordered = sorted(images, key=lambda t: t[0].left)
    ran = DyadicPartition(tuple(iv for iv, _ in ordered))
    position = {src: pos for pos, (_, src) in enumerate(ordered)}
    n = len(dom)
    rot = position[0]
    for i in range(n):
        if position[i] != (i + rot) % n:
            raise ValueError("not a Thompson map: image order is not a rotation")
    return ThompsonElement(dom_tree, partition_to_tree(ran), rot)


def reduce(e: ThompsonElement) -> ThompsonElement:
    """Canonical fully-cancelled fraction (idempotent)."""
    return from_piecewise(to_piecewise(e))


def equal(g: ThompsonElement, h: ThompsonElement) -> bool:
    return reduce(g) == reduce(h)


def compose(g: ThompsonElement, h: ThompsonElement) -> ThompsonElement:
    """Group product g.h = g o h (h acts first), returned reduced."""
    return from_piecewise(to_piecewise(g).compose(to_piecewise(h)))


# ---------------------------------------------------------------------------
# generators


def generator(name: str) -> ThompsonElement:
    """A, B, C (standard generators) or S (half rotation, S = A.C)."""
    L = LEAF
    if name == "A":
        return ThompsonElement(caret(L, caret(L, L)), caret(caret(L, L), L), 0)
    if name == "B":
        return ThompsonElement(caret(L, caret(L, caret(L, L))),
                               caret(L, caret(caret(L, L), L)), 0)
    if name == "C":
        t = caret(L, caret(L, L))
        return ThompsonElement(t, t, 2)
    if name == "S":
        t = caret(L, L)
        return ThompsonElement(t, t, 1)
    raise ValueError(f"unknown generator {name!r}")


def parse_word(word: str) -> ThompsonElement:
    """Generator word, leftmost acting last: 'A C' is A o C.

    Inverses: 'A⁻¹', 'A^-1' or 'A-1'.
    """
    out = IDENTITY
    for tok in word.split():
        inv = False
        base = tok
        for suffix in ("⁻¹", "^-1", "-1"):
            if tok.endswith(suffix):
                inv = True
                base = tok[: -len(suffix)]
                break
        g = generator(base)
        out = compose(out, g.inverse() if inv else g)
    return out


def element_from_document(doc) -> ThompsonElement:
    """Tree-pair literal {'domain': nested, 'range': nested, 'rotation': r},
    a breakpoint/slope table {'pieces': [[x, y, c], ...]}, or {'word': ...}."""
    if isinstance(doc, str):
        return parse_word(doc)
    if "word" in doc:
        return parse_word(doc["word"])
    if "pieces" in doc:
        pieces = tuple(PLPiece(Fraction(x), Fraction(y), int(c))
                       for x, y, c in doc["pieces"])
        return from_piecewise(PiecewiseLinearMap(pieces))
    dom = BinaryTree.from_nested(_tupled(doc["domain"]))
    ran = BinaryTree.from_nested(_tupled(doc["range"]))
    return ThompsonElement(dom, ran, int(doc.get("rotation", 0)))


def _tupled(obj):
    if obj == 0:
        return 0
    l, r = obj
    return (_tupled(l), _tupled(r))


def element_to_document(e: ThompsonElement) -> dict:
    e = reduce(e)
    return {"domain": _listed(e.domain_tree.to_nested()),
            "range": _listed(e.range_tree.to_nested()),
            "rotation": e.rotation}


def _listed(obj):
    if obj == 0:
        return 0
    l, r = obj
    return [_listed(l), _listed(r)]


# ---------------------------------------------------------------------------
# good partitions, slopes, Schwarzian


def good_partition(f: ThompsonElement, P: DyadicPartition) -> bool:
    """P is good iff it refines the reduced element's domain partition."""
    return is_refinement(reduce(f).domain_partition(), P)


def find_good(f: ThompsonElement, P0: DyadicPartition) -> DyadicPartition:
    return common_refinement(P0, reduce(f).domain_partition())


def slope_right(f: ThompsonElement, x: PointLike) -> int:
    """Exponent c with df/dx = 2^c as x is approached from the right."""
    return to_piecewise(f).piece_at(_as_fraction(x)).c


def schwarzian_measure(f: ThompsonElement) -> List[Tuple[DyadicRational, int]]:
    """Atomic measure at breakpoints with weights 2 (c_right - c_left).

    Elements of F contribute nothing at 0; rotations compare slopes across
    the wrap.
    """
    e = reduce(f)
    m = to_piecewise(e)
    out = []
    if e.rotation != 0:
        jump = m.pieces[0].c - m.pieces[-1].c
        if jump:
            out.append((DyadicRational.zero(), 2 * jump))
    for prev, cur in zip(m.pieces, m.pieces[1:]):
        jump = cur.c - prev.c
        if jump:
            out.append((DyadicRational.from_fraction(cur.x), 2 * jump))
    return out


# ---------------------------------------------------------------------------
# action on the vacuum: pullback machinery and the invariance check


def pullback_partition(f: ThompsonElement, Q: DyadicPartition
                       ) -> Tuple[DyadicPartition, List[int]]:
    """Domain partition P' = f^{-1}(Q) for Q refining f's range partition.

    Returns (P', sigma) with f(P'_i) = Q_{sigma[i]}.
    """
    e = reduce(f)
    ran = e.range_partition()
    if not is_refinement(ran, Q):
        raise ValueError("partition does not refine the range partition")
    dom = e.domain_partition()
    n = e.n_leaves
    pieces: List[StdInterval] = []
    sigma: List[int] = []
    qpos = {iv: k for k, iv in enumerate(Q.intervals)}
    for i, d_iv in enumerate(dom):
        r_iv = ran[(i + e.rotation) % n]
        c = d_iv.level - r_iv.level  # slope exponent on this leaf
        for q_iv in Q:
            if not r_iv.contains_interval(q_iv):
                continue
            lvl = q_iv.level + c
            offset = q_iv.left_numerator - (r_iv.left_numerator << (q_iv.level - r_iv.level))
            a = (d_iv.left_numerator << (lvl - d_iv.level)) + offset
            pieces.append(StdInterval(a, lvl))
            sigma.append(qpos[q_iv])
    P = DyadicPartition(tuple(pieces))
    return P, sigma


def transformed_vacuum_expectation_batch(f: ThompsonElement, Q: DyadicPartition,
                                         ops_by_slot: Dict[int, np.ndarray],
                                         V: Isometry3Box,
                                         pair_rooted: bool = False) -> np.ndarray:
    """<U(f) Omega| ops on Q |U(f) Omega> for batched ops (slot -> (B,d,d)).

    The transformed vacuum on Q carries the amplitudes of the vacuum tree of
    P' = f^{-1}(Q); operators attach at the pulled-back slots.  The default
    closes the root with the normalised trace (the correlator functional);
    `pair_rooted` uses the maximally entangled pair at the top caret (the
    direct-limit vacuum vector).
    """
    P, sigma = pullback_partition(f, Q)
    slot_of = {q: i for i, q in enumerate(sigma)}
    leaf_ops = {slot_of[q]: op for q, op in ops_by_slot.items()}
    tree = partition_to_tree(P)
    if pair_rooted:
        return treestate.pair_vacuum_expectation_batch(tree, V, leaf_ops)
    return treestate.vacuum_expectation_batch(tree, V, leaf_ops)


def transformed_vacuum_expectation(f: ThompsonElement, Q: DyadicPartition,
                                   ops_by_slot: Dict[int, np.ndarray],
                                   V: Isometry3Box) -> complex:
    ops = {k: np.asarray(v, dtype=complex)[None] for k, v in ops_by_slot.items()}
    return complex(transformed_vacuum_expectation_batch(f, Q, ops, V)[0])


def vacuum_invariance_check(f: ThompsonElement, V: Isometry3Box, level: int,
                            tol: float = 1e-10) -> Tuple[bool, float]:
    """Does U(f) fix the vacuum state?  Compares transformed against plain
    expectations of all single and double eigen-operator insertions over the
    level-`level` refinement, in the pair-rooted vacuum vector.

    Returns (all deviations <= tol, max deviation).
    """
    d = V.d
    if d ** (1 << level) > treestate.oracle_cap():
        raise ValueError("oracle size exceeded: level too deep for the check")
    S = eigendecompose(build_channel(V))
    mus = S.right_ops  # (n, d, d)
    e = reduce(f)
    Q = common_refinement(regular_partition(level), e.range_partition())
    tree = partition_to_tree(Q)
    m = len(Q)
    worst = 0.0
    for i in range(m):
        plain = treestate.pair_vacuum_expectation_batch(tree, V, {i: mus})
        moved = transformed_vacuum_expectation_batch(e, Q, {i: mus}, V,
                                                     pair_rooted=True)
        worst = max(worst, float(np.max(np.abs(plain - moved))))
    n = S.n
    pair_a = np.repeat(mus, n, axis=0)
    pair_b = np.tile(mus, (n, 1, 1))
    for i in range(m):
        for j in range(i + 1, m):
            plain = treestate.pair_vacuum_expectation_batch(
                tree, V, {i: pair_a, j: pair_b})
            moved = transformed_vacuum_expectation_batch(
                e, Q, {i: pair_a, j: pair_b}, V, pair_rooted=True)
            worst = max(worst, float(np.max(np.abs(plain - moved))))
    return worst <= tol, worst
