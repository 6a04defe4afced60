"""Exact finite balls of a Cayley graph.

``build_ball`` runs a breadth-first construction from the identity.
Vertices are identified through the oracle's canonical element keys
when the family provides them (free groups, free products of cyclics,
small-cancellation presentations with even relators); otherwise an
exact but slower mode compares candidates against same-level vertices
with pairwise triviality tests.  The stored word of every vertex is its
ShortLex normal form: the lexicographically least among its geodesic
words under the alphabet order.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import InternalConsistencyError, OutOfRange, ResourceLimit
from .group_oracle import (
    FreeGroupOracle,
    GroupOracle,
    oracle_from_description,
)

BALL_SCHEMA_VERSION = 1
DEFAULT_VERTEX_CAP = 2_000_000
_CAP_ENV = "BOUNDARYLEX_MAX_VERTICES"


def _vertex_cap(explicit: Optional[int]) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get(_CAP_ENV)
    return int(env) if env else DEFAULT_VERTEX_CAP


@dataclass
class HyperbolicityEstimate:
    """Maxima of examined slimness / four-point defects; lower bounds only."""

    delta_slim: Fraction
    delta_4pt: Fraction
    scope: dict

    @property
    def delta(self) -> Fraction:
        return max(self.delta_slim, self.delta_4pt)


class CayleyBall:
    """The radius-N ball of Cay(G, S) with levels, edges and geodesic predecessors.

    * ``words[v]``  -- ShortLex normal form of vertex v (``words[0] == ""``).
    * ``level[v]``  -- graph distance from the identity; equals ``len(words[v])``.
    * ``edges[v][i]`` -- target of the edge labelled ``alphabet.letters[i]``,
      or -1 when the product leaves the ball.
    * ``preds[v]``  -- list of (u, letter) with level(u) = level(v) - 1 and
      u * letter = v; nonempty for every v != 0.
    """

    def __init__(self, oracle: GroupOracle, radius: int):
        self.oracle = oracle
        self.radius = radius
        self.words: list[str] = [""]
        self.level: list[int] = [0]
        deg = len(oracle.alphabet)
        self.edges: list[list[int]] = [[-1] * deg]
        self.preds: list[list[tuple[int, str]]] = [[]]
        self._index: dict = {}
        self._level_start: list[int] = [0]  # first vertex id of each level
        self._exact_mode = not oracle.has_canonical_keys

    # -- identification ---------------------------------------------------

    def _locate_key(self, key) -> Optional[int]:
        return self._index.get(key)

    def _locate_exact(self, word: str, length: int) -> Optional[int]:
        inv = self.oracle.alphabet.inverse_word
        for v in self.vertices_at_level(length):
            if self.oracle.is_trivial(inv(self.words[v]) + word):
                return v
        return None

    def locate_word(self, word: str) -> int:
        """Vertex id of the element spelled by ``word``; OutOfRange if outside."""
        if self._exact_mode:
            length = self.oracle.geodesic_length(word)
            if length > self.radius:
                raise OutOfRange(f"element of length {length} outside radius {self.radius}")
            v = self._locate_exact(word, length)
        else:
            v = self._locate_key(self.oracle.element_key(word))
        if v is None:
            raise OutOfRange("element not in ball")
        return v

    def __contains__(self, word: str) -> bool:
        try:
            self.locate_word(word)
            return True
        except OutOfRange:
            return False

    # -- queries ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.words)

    def vertices_at_level(self, k: int) -> range:
        if k < 0 or k > self.radius:
            return range(0)
        start = self._level_start[k] if k < len(self._level_start) else len(self.words)
        end = (self._level_start[k + 1] if k + 1 < len(self._level_start)
               else len(self.words))
        return range(start, end)

    def ball_size(self, k: int) -> int:
        """Number of vertices at level <= k."""
        if k < 0 or k > self.radius:
            raise OutOfRange(f"k={k} outside [0, {self.radius}]")
        return self.vertices_at_level(k).stop

    def m_of(self, delta) -> int:
        """Size of the radius-floor(5*delta) ball; bounds every such ball
        by vertex-transitivity."""
        r = int(5 * Fraction(delta))
        if r > self.radius:
            raise OutOfRange(f"floor(5*delta)={r} exceeds radius {self.radius}")
        return self.ball_size(r)

    def distance(self, x: int, y: int) -> int:
        """d(x, y), via the length of the element x^-1 y."""
        wx, wy = self.words[x], self.words[y]
        d = self.oracle.distance_words(wx, wy)
        if d > self.radius:
            raise OutOfRange(f"x^-1 y has length {d} > radius {self.radius}")
        return d

    def shortlex_nf(self, v: int) -> str:
        return self.words[v]

    def walk(self, start: int, word: str) -> int:
        """Follow edges letter by letter; OutOfRange when the path exits the ball."""
        v = start
        letters = self.oracle.alphabet
        for ch in word:
            t = self.edges[v][letters.index(ch)]
            if t < 0:
                raise OutOfRange(f"edge {ch!r} from vertex {v} leaves the ball")
            v = t
        return v

    def enumerate_geodesics(self, x: int, y: int, cap: int = 10_000):
        """All geodesic words from x to y in lex order.

        Returns (words, truncated); ``truncated`` flags that the list was
        cut at ``cap``.  Enumeration is a forward DFS from x that follows
        edges in letter order, keeping only steps that stay on some
        geodesic toward y (checked with exact oracle distances).
        """
        total = self.distance(x, y)  # raises OutOfRange if not computable
        inv = self.oracle.alphabet.inverse_word
        target = inv(self.words[x]) + self.words[y]
        out: list[str] = []
        truncated = False

        def extend(prefix: str, remaining: int):
            nonlocal truncated
            if truncated:
                return
            if remaining == 0:
                out.append(prefix)
                if len(out) >= cap:
                    truncated = True
                return
            for ch in self.oracle.alphabet.letters:
                rest = self.oracle.reduce(inv(prefix + ch) + target)
                if len(rest) == remaining - 1:
                    extend(prefix + ch, remaining - 1)
                if truncated:
                    return

        extend("", total)
        return out, truncated

    def geodesic_count(self, v: int) -> int:
        """Number of geodesic words from the identity to v (DP over preds)."""
        counts = getattr(self, "_geo_counts", None)
        if counts is None:
            counts = [0] * len(self.words)
            counts[0] = 1
            for u in range(1, len(self.words)):
                counts[u] = sum(counts[p] for p, _ in self.preds[u])
            self._geo_counts = counts
        return counts[v]

    def vertices_near(self, x: int, s: int) -> list[int]:
        """Vertices within distance s of x, exact.

        Uses an in-ball BFS when the ball provably contains every
        geodesic between x and candidates (level(x) + floor(s/2) <=
        radius); otherwise falls back to oracle distance scans.
        """
        if s < 0:
            return []
        if self.level[x] + s // 2 <= self.radius:
            dist = {x: 0}
            frontier = [x]
            for d in range(1, s + 1):
                nxt = []
                for u in frontier:
                    for t in self.edges[u]:
                        if t >= 0 and t not in dist:
                            dist[t] = d
                            nxt.append(t)
                frontier = nxt
            return sorted(dist)
        wx = self.words[x]
        out = []
        for v in range(len(self.words)):
            if abs(self.level[v] - self.level[x]) <= s:
                if self.oracle.distance_words(wx, self.words[v]) <= s:
                    out.append(v)
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "schema_version": BALL_SCHEMA_VERSION,
            "oracle": self.oracle.describe(),
            "radius": self.radius,
            "vertices": self.words,
            "level": self.level,
            "edges": self.edges,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CayleyBall":
        if data.get("schema_version") != BALL_SCHEMA_VERSION:
            raise OutOfRange(f"unsupported ball schema {data.get('schema_version')}")
        oracle = oracle_from_description(data["oracle"])
        ball = cls(oracle, int(data["radius"]))
        ball.words = list(data["vertices"])
        ball.level = [int(x) for x in data["level"]]
        ball.edges = [list(map(int, row)) for row in data["edges"]]
        n = len(ball.words)
        ball.preds = [[] for _ in range(n)]
        letters = oracle.alphabet.letters
        for v in range(n):
            for i, t in enumerate(ball.edges[v]):
                if t >= 0 and ball.level[t] == ball.level[v] + 1:
                    ball.preds[t].append((v, letters[i]))
        ball._level_start = []
        for v in range(n):
            while len(ball._level_start) <= ball.level[v]:
                ball._level_start.append(v)
        if not ball._exact_mode:
            ball._index = {oracle.element_key(w): v for v, w in enumerate(ball.words)}
        return ball


def save_ball(ball: CayleyBall, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(ball.to_json(), fh)
    os.replace(tmp, path)


def load_ball(path: str) -> CayleyBall:
    with open(path) as fh:
        return CayleyBall.from_json(json.load(fh))


def build_ball(oracle: GroupOracle, radius: int,
               max_vertices: Optional[int] = None,
               identification: str = "auto") -> CayleyBall:
    """Breadth-first construction of the radius-N ball from the identity.

    A candidate w*s is identified against existing vertices only at
    levels |w|-1, |w| and |w|+1 (no other level is possible).  Level
    |w|-1 identifications are free: that edge was recorded from the
    lower endpoint.  The remaining identifications go through canonical
    element keys in ``fast`` mode and through pairwise triviality tests
    within a level in ``exact`` mode.
    """
    if radius < 0:
        raise OutOfRange("radius must be >= 0")
    if identification not in ("auto", "fast", "exact"):
        raise ValueError(f"bad identification mode {identification!r}")
    fast = oracle.has_canonical_keys if identification == "auto" else identification == "fast"
    if fast and not oracle.has_canonical_keys:
        raise ValueError(f"{oracle.family} oracle does not support fast identification")

    cap = _vertex_cap(max_vertices)
    alphabet = oracle.alphabet
    letters = alphabet.letters
    inv_index = [alphabet.index(alphabet.inverse(s)) for s in letters]

    ball = CayleyBall(oracle, radius)
    ball._exact_mode = not fast
    if fast:
        ball._index[oracle.element_key("")] = 0

    words, level, edges, preds = ball.words, ball.level, ball.edges, ball.preds

    for k in range(radius + 1):
        this_level = list(ball.vertices_at_level(k))
        if not this_level:
            break
        new_start = len(words)
        if k < radius:
            ball._level_start.append(new_start)  # level k+1 grows during this phase
        for v in this_level:
            wv = words[v]
            pred_by_letter = {t: u for u, t in preds[v]}
            for si, s in enumerate(letters):
                if edges[v][si] != -1:
                    continue
                down = pred_by_letter.get(alphabet.inverse(s))
                if down is not None:
                    edges[v][si] = down
                    continue
                cand = wv + s
                lvl, key = oracle.candidate_info(cand)
                if lvl == k - 1:
                    # must equal a predecessor; reaching here means the
                    # canonical-key assumption failed earlier
                    raise InternalConsistencyError(
                        f"candidate {cand!r} drops to level {lvl} without a "
                        f"recorded edge; canonical keys are incomplete")
                if lvl == k:
                    t = (ball._locate_key(key) if fast
                         else ball._locate_exact(cand, k))
                    if t is None:
                        raise InternalConsistencyError(
                            f"level-{k} candidate {cand!r} matches no vertex")
                    edges[v][si] = t
                    edges[t][inv_index[si]] = v
                    continue
                if lvl != k + 1:
                    raise InternalConsistencyError(
                        f"candidate {cand!r} at impossible level {lvl} from {k}")
                if k == radius:
                    continue  # product leaves the ball
                t = (ball._locate_key(key) if fast
                     else ball._locate_exact(cand, k + 1))
                if t is None:
                    if len(words) >= cap:
                        raise ResourceLimit(
                            f"vertex cap {cap} exceeded at level {k + 1}")
                    t = len(words)
                    words.append(cand)
                    level.append(k + 1)
                    edges.append([-1] * len(letters))
                    preds.append([])
                    if fast:
                        ball._index[key] = t
                edges[v][si] = t
                edges[t][inv_index[si]] = v
                preds[t].append((v, s))
        if len(words) == new_start and k < radius:
            ball._level_start.pop()  # nothing appeared at level k+1
        else:
            # finalize ShortLex normal forms of the freshly completed level
            for t in range(new_start, len(words)):
                best = min((words[u] + s for u, s in preds[t]),
                           key=alphabet.order_key)
                words[t] = best
    return ball


# -- hyperbolicity estimation ------------------------------------------------


def _pairwise_distances_free(ball: CayleyBall, verts: Sequence[int]) -> np.ndarray:
    """Vectorized distance matrix for free groups: d = |u|+|v|-2*lcp(u, v)."""
    order = {ch: i for i, ch in enumerate(ball.oracle.alphabet.letters)}
    n = len(verts)
    width = max((len(ball.words[v]) for v in verts), default=0)
    codes = np.full((n, max(width, 1)), -1, dtype=np.int8)
    lengths = np.zeros(n, dtype=np.int32)
    for i, v in enumerate(verts):
        w = ball.words[v]
        lengths[i] = len(w)
        for j, ch in enumerate(w):
            codes[i, j] = order[ch]
    eq = codes[:, None, :] == codes[None, :, :]
    # padding compares equal beyond both words; cap lcp by min length
    lcp = np.cumprod(eq, axis=2).sum(axis=2)
    lcp = np.minimum(lcp, np.minimum(lengths[:, None], lengths[None, :]))
    return (lengths[:, None] + lengths[None, :] - 2 * lcp).astype(np.int32)


class _DistanceCache:
    """Memoized oracle distances between ball vertices / raw words."""

    def __init__(self, ball: CayleyBall):
        self.ball = ball
        self.memo: dict[tuple[str, str], int] = {}

    def between_words(self, u: str, v: str) -> int:
        if u > v:
            u, v = v, u
        key = (u, v)
        d = self.memo.get(key)
        if d is None:
            d = self.ball.oracle.distance_words(u, v)
            self.memo[key] = d
        return d


def _side_words(base: str, word: str) -> list[str]:
    return [base + word[:i] for i in range(len(word) + 1)]


def _slim_defect_words(cache: _DistanceCache, sides: list[list[str]]) -> int:
    worst = 0
    for i in range(3):
        others = [p for j in (0, 1, 2) if j != i for p in sides[j]]
        for p in sides[i]:
            best = min(cache.between_words(p, q) for q in others)
            if best > worst:
                worst = best
    return worst


def _four_point_defect(d_xy, d_xz, d_yz, d_wx, d_wy, d_wz) -> Fraction:
    sums = sorted((d_wx + d_yz, d_wy + d_xz, d_wz + d_xy), reverse=True)
    return Fraction(sums[0] - sums[1], 2)


_FREE_MATRIX_LIMIT = 8192


def _slim_scan_free(ball: CayleyBall, dmat: np.ndarray, pairs, side_bound: int):
    """Batched slimness scan for free groups.

    Geodesics in a free group are unique and consist of word prefixes,
    all of which are ball vertices, and the side y -> z is (as a point
    set) contained in the union of the prefix lines of y and z.  For a
    point p at depth t on the e -> y side, the distance to the third
    side restricted to y's own prefix line is exactly max(0, lcp - t)
    (nested prefixes of one geodesic word sit at their index distance).
    """
    n = dmat.shape[0]
    width = side_bound + 1
    prefix_ids = np.zeros((n, width), dtype=np.int32)
    lengths = np.asarray(ball.level[:n], dtype=np.int32)
    for v in range(n):
        w = ball.words[v]
        ids = [ball._index[w[:i]] for i in range(len(w) + 1)]
        ids += [ids[-1]] * (width - len(ids))
        prefix_ids[v] = ids

    slim = 0
    examined = 0
    pos = np.arange(width, dtype=np.int32)[None, :]
    batch: list[tuple[int, int]] = []

    def flush():
        nonlocal slim, examined
        if not batch:
            return
        arr = np.asarray(batch, dtype=np.int64)
        ys, zs = arr[:, 0], arr[:, 1]
        py, pz = prefix_ids[ys], prefix_ids[zs]
        leny, lenz = lengths[ys], lengths[zs]
        lcp = (leny + lenz - dmat[ys, zs].astype(np.int32)) // 2
        block = dmat[py[:, :, None], pz[:, None, :]].astype(np.int32)
        for side_len, mins in ((leny, block.min(axis=2)),
                               (lenz, block.min(axis=1))):
            depth = np.minimum(pos, side_len[:, None])
            own_line = np.maximum(0, lcp[:, None] - depth)
            defect = np.minimum(mins, own_line).max(axis=1)
            slim = max(slim, int(defect.max(initial=0)))
        examined += len(batch)
        batch.clear()

    for y, z in pairs:
        if dmat[y, z] <= side_bound:
            batch.append((y, z))
            if len(batch) >= 20_000:
                flush()
    flush()
    return slim, examined


def estimate_delta(ball: CayleyBall, side_bound: int,
                   sample: int = 50_000, seed: int = 0,
                   alternates: int = 2) -> HyperbolicityEstimate:
    """Measure slimness and four-point defects on geodesic configurations.

    Triangles are anchored at the identity (every triangle translates to
    one based there without changing defects).  The pair scan over the
    two free corners is exhaustive when the pair count is at most
    ``sample``, else a seeded pseudo-random sample of that size.  Each
    side uses the canonical ShortLex geodesic plus up to ``alternates``
    geodesics from enumeration.  Both reported values are maxima over
    examined configurations, hence lower bounds for the ball-restricted
    constants.
    """
    if side_bound > ball.radius:
        raise OutOfRange(f"side_bound {side_bound} exceeds radius {ball.radius}")
    rng = random.Random(seed)
    n = ball.ball_size(side_bound)
    npairs = n * (n + 1) // 2
    exhaustive = npairs <= sample

    dmat = None
    if isinstance(ball.oracle, FreeGroupOracle) and n <= _FREE_MATRIX_LIMIT:
        dmat = _pairwise_distances_free(ball, range(n)).astype(np.int16)

    def _sampled_pairs():
        # draw the second corner from a short edge walk so that sampled
        # pairs actually satisfy the side bound in large balls
        deg = len(ball.oracle.alphabet)
        for _ in range(sample):
            y = rng.randrange(n)
            z = y
            for _ in range(rng.randint(0, side_bound)):
                t = ball.edges[z][rng.randrange(deg)]
                if 0 <= t < n:
                    z = t
            yield y, z

    if exhaustive:
        pair_iter = ((y, z) for y in range(n) for z in range(y, n))
    else:
        pair_iter = _sampled_pairs()

    if dmat is not None:
        slim, examined = _slim_scan_free(ball, dmat, pair_iter, side_bound)
    else:
        slim = 0
        examined = 0
        cache = _DistanceCache(ball)
        for y, z in pair_iter:
            wy, wz = ball.words[y], ball.words[z]
            if cache.between_words(wy, wz) > side_bound:
                continue
            geos_y, _ = ball.enumerate_geodesics(0, y, cap=max(1, alternates))
            geos_z, _ = ball.enumerate_geodesics(0, z, cap=max(1, alternates))
            geos_yz, _ = ball.enumerate_geodesics(y, z, cap=max(1, alternates))
            for gy in geos_y:
                for gz in geos_z:
                    for gyz in geos_yz:
                        sides = [_side_words("", gy), _side_words("", gz),
                                 _side_words(wy, gyz)]
                        slim = max(slim, _slim_defect_words(cache, sides))
            examined += 1

    # four-point condition on seeded anchored tuples
    four = Fraction(0)
    cache4 = _DistanceCache(ball)
    for _ in range(min(sample, n ** 3)):
        x, y, z = (rng.randrange(n) for _ in range(3))
        if dmat is not None:
            d_xy, d_xz, d_yz = int(dmat[x, y]), int(dmat[x, z]), int(dmat[y, z])
        else:
            wx, wy, wz = (ball.words[t] for t in (x, y, z))
            d_xy = cache4.between_words(wx, wy)
            d_xz = cache4.between_words(wx, wz)
            d_yz = cache4.between_words(wy, wz)
        if max(d_xy, d_xz, d_yz) > side_bound:
            continue
        four = max(four, _four_point_defect(
            d_xy, d_xz, d_yz, ball.level[x], ball.level[y], ball.level[z]))

    scope = {"ball_radius": ball.radius, "side_bound": side_bound,
             "sample": sample, "seed": seed, "alternates": alternates,
             "exhaustive_pairs": exhaustive, "pairs_examined": examined}
    return HyperbolicityEstimate(Fraction(slim), four, scope)
