"""Sequences over a finite alphabet under the left shift.

Two desk-scale stand-ins for infinite sequences are provided:

* ``PeriodicSeq`` -- an eventually periodic sequence, stored in the
  canonical (preperiod, primitive period) form.  All computations on
  pairs of these are exact.
* ``TruncatedSeq`` -- a plain finite prefix.  Statements about the
  (unknown) infinite tail are inferred from overlaps of at least
  ``ell_min`` letters and are flagged as truncation-limited estimates.

Two metrics appear: ``rho_s`` treats the models as surrogates for
infinite sequences (finite exactly on tail-equivalent pairs), while
``rho_graph`` is the exact graph metric of the shift map restricted to
the finite model world, used by the cover construction and its audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .errors import (
    AlphabetMismatch,
    NotShiftClosed,
    OutOfRange,
    WindowTooSmall,
)

INF = math.inf
DEFAULT_ELL_MIN = 8


def _primitive_root(word: str) -> str:
    k = (word + word).find(word, 1)
    return word[:k] if 0 < k < len(word) else word


@dataclass(frozen=True)
class PeriodicSeq:
    """Eventually periodic sequence preperiod . period^infinity, canonicalized.

    Canonical form: the period is primitive and no trailing preperiod
    letter can be absorbed into a rotation of the period, so equal
    sequences have equal (preperiod, period) pairs.
    """

    preperiod: str
    period: str
    alphabet: Optional[str] = None

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        per = _primitive_root(self.period)
        pre = self.preperiod
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    def key(self):
        return ("p", self.preperiod, self.period)

    def shift(self) -> "PeriodicSeq":
        if self.preperiod:
            return PeriodicSeq(self.preperiod[1:], self.period, self.alphabet)
        return PeriodicSeq("", self.period[1:] + self.period[0], self.alphabet)

    def prefix(self, n: int) -> str:
        reps = max(0, (n - len(self.preperiod)) // len(self.period) + 1)
        return (self.preperiod + self.period * reps)[:n]

    def states(self) -> int:
        """Number of distinct shifts of this sequence."""
        return len(self.preperiod) + len(self.period)

    def __str__(self):
        return f"{self.preperiod}({self.period})^inf"


@dataclass(frozen=True)
class TruncatedSeq:
    """A finite prefix of an otherwise unknown sequence."""

    word: str
    alphabet: Optional[str] = None

    def key(self):
        return ("t", self.word)

    def shift(self) -> "TruncatedSeq":
        return TruncatedSeq(self.word[1:] if self.word else "", self.alphabet)

    def prefix(self, n: int) -> str:
        return self.word[:n]

    def states(self) -> int:
        return len(self.word) + 1

    def __len__(self):
        return len(self.word)

    def __str__(self):
        return f"{self.word}..."


SeqModel = Union[PeriodicSeq, TruncatedSeq]


def _check_alphabets(x: SeqModel, y: SeqModel) -> None:
    if x.alphabet is not None and y.alphabet is not None and x.alphabet != y.alphabet:
        raise AlphabetMismatch(f"{x.alphabet!r} vs {y.alphabet!r}")


def shift(x: SeqModel) -> SeqModel:
    return x.shift()


def seq_key(x: SeqModel):
    return x.key()


def _chain(x: SeqModel) -> list[SeqModel]:
    """x, s(x), s^2(x), ... through every distinct state (plus one lap marker)."""
    out = [x]
    for _ in range(x.states() - 1):
        out.append(out[-1].shift())
    return out


def _rho_periodic(x: PeriodicSeq, y: PeriodicSeq):
    rx = _primitive_root(x.period)
    if (_primitive_root(y.period) not in rx + rx) or len(y.period) != len(rx):
        return INF
    cx, cy = _chain(x), _chain(y)
    keys_y = {}
    for j, m in enumerate(cy):
        keys_y.setdefault(m.key(), j)
    best = INF
    for i, m in enumerate(cx):
        j = keys_y.get(m.key())
        if j is not None and i + j < best:
            best = i + j
    return best


def _rho_truncated(x: TruncatedSeq, y: TruncatedSeq, ell_min: int):
    wx, wy = x.word, y.word
    if min(len(wx), len(wy)) < ell_min:
        raise WindowTooSmall(
            f"overlap below ell_min={ell_min} for lengths {len(wx)}, {len(wy)}")
    best = INF
    for n0 in range(len(wx) - ell_min + 1):
        for n1 in range(len(wy) - ell_min + 1):
            if n0 + n1 >= best:
                continue
            overlap = min(len(wx) - n0, len(wy) - n1)
            if wx[n0:n0 + overlap] == wy[n1:n1 + overlap]:
                best = n0 + n1
    return best


def _materialize(x: PeriodicSeq, length: int) -> TruncatedSeq:
    return TruncatedSeq(x.prefix(length), x.alphabet)


def rho_s(x: SeqModel, y: SeqModel, ell_min: int = DEFAULT_ELL_MIN):
    """Shift-graph distance between the (surrogate) infinite sequences.

    Returns (value, exact).  The value is min(n0 + n1) over pairs with
    shift^n0(x) = shift^n1(y), or infinity.  Exact for two periodic
    models; for truncated models the tails must agree on the full
    remaining overlap (at least ``ell_min`` letters) and the result is a
    truncation-limited lower estimate.
    """
    _check_alphabets(x, y)
    if isinstance(x, PeriodicSeq) and isinstance(y, PeriodicSeq):
        return _rho_periodic(x, y), True
    if isinstance(x, PeriodicSeq):
        x = _materialize(x, len(y.word) + x.states() + ell_min)
    if isinstance(y, PeriodicSeq):
        y = _materialize(y, len(x.word) + y.states() + ell_min)
    return _rho_truncated(x, y, ell_min), False


def rho_graph(x: SeqModel, y: SeqModel):
    """Exact graph metric of the shift map on the finite model world.

    Model states are compared literally (canonical forms for periodic
    models, plain words for truncated ones).  In particular every pair
    of truncated models is at finite distance through the empty word.
    """
    _check_alphabets(x, y)
    if isinstance(x, PeriodicSeq) != isinstance(y, PeriodicSeq):
        return INF
    cx, cy = _chain(x), _chain(y)
    pos_y = {}
    for j, m in enumerate(cy):
        pos_y.setdefault(m.key(), j)
    best = INF
    for i, m in enumerate(cx):
        j = pos_y.get(m.key())
        if j is not None and i + j < best:
            best = i + j
    return best


def _tail_match(x: SeqModel, y: SeqModel, i: int, j: int, ell_min: int) -> bool:
    """Does shift^i(x) equal shift^j(y), in the appropriate sense?"""
    xs = x
    for _ in range(i):
        xs = xs.shift()
    ys = y
    for _ in range(j):
        ys = ys.shift()
    if isinstance(xs, PeriodicSeq) and isinstance(ys, PeriodicSeq):
        return xs.key() == ys.key()
    if isinstance(xs, PeriodicSeq):
        xs = _materialize(xs, len(ys.word) + xs.states())
    if isinstance(ys, PeriodicSeq):
        ys = _materialize(ys, len(xs.word) + ys.states())
    wx, wy = xs.word, ys.word
    overlap = min(len(wx), len(wy))
    if overlap < ell_min:
        return False
    return wx[:overlap] == wy[:overlap]


@dataclass
class FinitePartition:
    """An equivalence relation on an indexed finite carrier."""

    items: list
    class_of: list[int]
    meta: dict = field(default_factory=dict)

    def classes(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, c in enumerate(self.class_of):
            out.setdefault(c, []).append(i)
        return out

    @property
    def num_classes(self) -> int:
        return len(set(self.class_of))

    def refines(self, other: "FinitePartition") -> bool:
        """True when every class of self is contained in a class of other."""
        if len(self.class_of) != len(other.class_of):
            raise ValueError("partitions live on different carriers")
        image: dict[int, int] = {}
        for i, c in enumerate(self.class_of):
            o = other.class_of[i]
            if image.setdefault(c, o) != o:
                return False
        return True

    def same_blocks(self, other: "FinitePartition") -> bool:
        return self.refines(other) and other.refines(self)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)

    def partition(self, items: list, meta: dict) -> FinitePartition:
        roots: dict[int, int] = {}
        class_of = []
        for i in range(len(items)):
            r = self.find(i)
            class_of.append(roots.setdefault(r, len(roots)))
        return FinitePartition(items, class_of, meta)


def tail_partition(items: Sequence[SeqModel],
                   ell_min: int = DEFAULT_ELL_MIN) -> FinitePartition:
    """Connected components of the finite-rho_s graph on the carrier."""
    items = list(items)
    uf = _UnionFind(len(items))
    exact = True
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            value, is_exact = rho_s(items[i], items[j], ell_min)
            exact = exact and is_exact
            if value < INF:
                uf.union(i, j)
    return uf.partition(items, {"relation": "tail", "exact": exact,
                                "ell_min": ell_min})


def filtration_Rn(items: Sequence[SeqModel], n: int,
                  ell_min: int = DEFAULT_ELL_MIN) -> FinitePartition:
    """Transitive closure of {shift^i(x) = shift^j(y) : i, j <= n} on the carrier.

    Monotone in n and equal to ``tail_partition`` once n reaches the
    maximal state count of the carrier members.
    """
    items = list(items)
    uf = _UnionFind(len(items))
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            found = False
            for a in range(min(n, items[i].states() - 1) + 1):
                for b in range(min(n, items[j].states() - 1) + 1):
                    if _tail_match(items[i], items[j], a, b, ell_min):
                        found = True
                        break
                if found:
                    break
            if found:
                uf.union(i, j)
    return uf.partition(items, {"relation": f"R_{n}", "n": n, "ell_min": ell_min})


# -- bounded cover of the shift graph ----------------------------------------


def _forest_structure(items: list[SeqModel]):
    """Component ids, heights above the cycle, successor map and cycle layout.

    The shift restricted to a finite shift-closed carrier is a
    functional graph: every component contains exactly one cycle
    (a fixed point such as the empty truncated word, or the rotation
    cycle of a primitive period), and the rest hangs as trees.
    """
    index = {}
    for i, x in enumerate(items):
        index.setdefault(x.key(), i)
    succ = []
    for x in items:
        j = index.get(x.shift().key())
        if j is None:
            raise NotShiftClosed(f"shift of {x} missing from carrier")
        succ.append(j)

    n = len(items)
    comp = [-1] * n
    height = [0] * n
    on_cycle = [False] * n
    cyc_pos = [0] * n
    cyc_len = [0] * n
    ncomp = 0
    state = [0] * n  # 0 unseen, 1 on stack, 2 done

    for start in range(n):
        if state[start] == 2:
            continue
        path = []
        v = start
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = succ[v]
        if state[v] == 1:
            # fresh cycle found along the current path
            cid = ncomp
            ncomp += 1
            cut = path.index(v)
            cycle = path[cut:]
            for p, node in enumerate(cycle):
                comp[node] = cid
                on_cycle[node] = True
                cyc_pos[node] = p
                cyc_len[node] = len(cycle)
                height[node] = 0
                state[node] = 2
            stem = path[:cut]
        else:
            cid = comp[v]
            stem = path
        for node in reversed(stem):
            comp[node] = cid
            height[node] = height[succ[node]] + 1
            state[node] = 2
    return comp, height, succ, on_cycle, cyc_pos, cyc_len


def asdim_cover(items: Sequence[SeqModel], T: int) -> FinitePartition:
    """Uniformly bounded cover of a shift-closed carrier at scale T.

    Heights are measured to the component's cycle.  Classes are cut from
    height bands of width 3T: a point in band k >= 1 is classed by its
    ancestor at height 3Tk - T, a point in band 0 by the arc (length at
    most 2T) of the cycle its descent enters.  Every class has
    rho-diameter at most 8T - 2, and any ball of radius T meets at most
    two classes; both facts are re-measured, not trusted, by
    ``audit_cover``.
    """
    if T < 1:
        raise OutOfRange("scale T must be >= 1")
    items = list(items)
    if not items:
        return FinitePartition([], [], {"scale": T, "construction": "band-shadow"})
    comp, height, succ, on_cycle, cyc_pos, cyc_len = _forest_structure(items)

    labels = []
    for i in range(len(items)):
        h = height[i]
        band = h // (3 * T)
        if band == 0:
            v = i
            for _ in range(h):
                v = succ[v]
            p = cyc_len[v]
            arcs = max(1, -(-p // (2 * T)))  # ceil
            arc = (cyc_pos[v] * arcs) // p
            labels.append((comp[i], 0, "arc", arc))
        else:
            anchor = 3 * T * band - T
            v = i
            for _ in range(h - anchor):
                v = succ[v]
            labels.append((comp[i], band, "anc", v))

    ids: dict = {}
    class_of = [ids.setdefault(lab, len(ids)) for lab in labels]
    return FinitePartition(items, class_of,
                           {"scale": T, "construction": "band-shadow",
                            "band_width": 3 * T, "diameter_bound": 8 * T,
                            "max_class_diameter": "unknown"})


def _succ_distance(a: int, b: int, items: list[SeqModel],
                   succ: Sequence[int]) -> float:
    """rho_graph through carrier indices: min i + j with shift^i a = shift^j b."""
    seen: dict[int, int] = {}
    v = a
    for i in range(items[a].states()):
        if v not in seen:
            seen[v] = i
        v = succ[v]
    best = INF
    v = b
    for j in range(items[b].states()):
        i = seen.get(v)
        if i is not None and i + j < best:
            best = i + j
        v = succ[v]
    return best


def _class_diameter(members: list[int], items: list[SeqModel],
                    succ: Sequence[int], on_cycle: Sequence[bool],
                    cyc_len: Sequence[int]) -> int:
    """Exact rho_graph diameter of one cover class.

    Classes away from cycles of length > 1 carry a tree metric, where
    the double-sweep trick gives the diameter in linear time; classes on
    a longer cycle fall back to a pairwise scan.
    """
    if len(members) <= 1:
        return 0
    tree_like = all(not on_cycle[m] or cyc_len[m] == 1 for m in members)
    if tree_like:
        far = members[0]
        best = -1
        for m in members:
            d = _succ_distance(members[0], m, items, succ)
            if d > best:
                best, far = d, m
        diam = 0
        for m in members:
            diam = max(diam, _succ_distance(far, m, items, succ))
        return int(diam)
    diam = 0
    for ai in range(len(members)):
        for bi in range(ai + 1, len(members)):
            d = _succ_distance(members[ai], members[bi], items, succ)
            if d < INF and d > diam:
                diam = int(d)
    return diam


def audit_cover(partition: FinitePartition, T: int,
                items: Optional[Sequence[SeqModel]] = None) -> dict:
    """Measure the class diameters and the ball-class constant of a cover.

    ``max_diam`` is the maximal pairwise rho_graph diameter of a class;
    ``max_ball_classes`` is the maximal number of classes met by a ball
    of radius T, exhaustively over the carrier.
    """
    items = list(items) if items is not None else partition.items
    if len(items) != len(partition.class_of):
        raise ValueError("items do not match the partition carrier")
    if not items:
        return {"max_diam": 0, "max_ball_classes": 0, "scale": T, "classes": 0}

    comp, height, succ, on_cycle, cyc_pos, cyc_len = _forest_structure(items)

    max_diam = 0
    for members in partition.classes().values():
        max_diam = max(max_diam, _class_diameter(members, items, succ,
                                                 on_cycle, cyc_len))

    # ball enumeration through shift chains: y is within T of x iff some
    # shift^i(x) = shift^j(y) with i + j <= T
    reach: dict = {}
    for yi, y in enumerate(items):
        v = y
        for j in range(min(T, y.states() - 1) + 1):
            reach.setdefault(v.key(), []).append((yi, j))
            v = v.shift()
    max_ball = 0
    for xi, x in enumerate(items):
        seen_classes = set()
        v = x
        for i in range(min(T, x.states() - 1) + 1):
            for yi, j in reach.get(v.key(), ()):
                if i + j <= T:
                    seen_classes.add(partition.class_of[yi])
            v = v.shift()
        max_ball = max(max_ball, len(seen_classes))
    return {"max_diam": max_diam, "max_ball_classes": max_ball,
            "scale": T, "classes": partition.num_classes}


def shift_closure(items: Iterable[SeqModel]) -> list[SeqModel]:
    """Close a carrier under the shift map, deduplicated, input order first."""
    out: list[SeqModel] = []
    seen = set()
    queue = list(items)
    while queue:
        x = queue.pop(0)
        k = x.key()
        if k in seen:
            continue
        seen.add(k)
        out.append(x)
        queue.append(x.shift())
    return out
