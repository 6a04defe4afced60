"""Finite-depth geodesic rays toward the boundary.

A boundary point is represented by a :class:`RaySurrogate`: a geodesic
word together with a verified extension margin, usually the prefix of a
periodic word u^infinity.  On top of these the module provides the path
type map, fellow-traveling checks for rays with equal or different
basepoints, geodesic segment substitution, the finite-horizon
lex-minimal sequence map ``phi_hat``, translation of rays by group
elements, and the deduplicated ball of translated boundary points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .cayley import CayleyBall
from .errors import (
    EmptyTargetSet,
    NotAPath,
    NotGeodesic,
    NotGeodesicReplacement,
    OutOfRange,
)
from .group_oracle import GroupOracle


@dataclass(frozen=True)
class RaySurrogate:
    """A geodesic word standing in for a boundary point at finite depth.

    ``word`` is geodesic and, by construction, extends to a verified
    geodesic word of length depth + margin; ``seed`` records the base of
    a periodic ray when there is one.
    """

    word: str
    depth: int
    margin: int
    seed: Optional[str] = None

    def __post_init__(self):
        if len(self.word) != self.depth:
            raise ValueError("depth must equal len(word)")

    def prefix(self, n: int) -> str:
        if n > self.depth:
            raise OutOfRange(f"prefix {n} beyond depth {self.depth}")
        return self.word[:n]

    def to_json(self) -> dict:
        return {"word": self.word, "depth": self.depth,
                "margin": self.margin, "seed": self.seed}

    @classmethod
    def from_json(cls, data: dict) -> "RaySurrogate":
        return cls(data["word"], int(data["depth"]), int(data["margin"]),
                   data.get("seed"))


@dataclass(frozen=True)
class SigmaSequence:
    """A finite truncation of the lex-minimal type sequence of a boundary point."""

    letters: str
    depth: int
    horizon: int
    slack: int

    def __post_init__(self):
        if len(self.letters) != self.depth:
            raise ValueError("depth must equal len(letters)")


def typ_of(ball: CayleyBall, path: Sequence[int]) -> str:
    """The letter sequence x_n^-1 x_{n+1} along a vertex path of the ball."""
    letters = ball.oracle.alphabet.letters
    out = []
    for u, v in zip(path, path[1:]):
        for i, s in enumerate(letters):
            if ball.edges[u][i] == v:
                out.append(s)
                break
        else:
            raise NotAPath(f"vertices {u} and {v} are not adjacent")
    return "".join(out)


def make_periodic_ray(oracle: GroupOracle, u: str, depth: int,
                      margin: int = 0, ) -> RaySurrogate:
    """Surrogate for the boundary point of u^infinity.

    The prefix of u^infinity of length depth + margin is checked to be
    geodesic (prefixes of geodesics are geodesic, so this single check
    covers all u^k inside the verified horizon).
    """
    if not u:
        raise NotGeodesic("seed word must be nonempty")
    oracle.alphabet.validate(u)
    total = depth + margin
    reps = total // len(u) + 2
    full = (u * reps)[:total]
    if oracle.geodesic_length(full) != total:
        raise NotGeodesic(f"{u!r}^k is not geodesic out to length {total}")
    return RaySurrogate(full[:depth], depth, margin, seed=u)


def ray_vertex_word(base: str, ray: RaySurrogate, n: int) -> str:
    """Word of the n-th vertex of the ray translated to start at ``base``."""
    return base + ray.prefix(n)


@dataclass
class SameBaseReport:
    max_gap: int
    ok: bool
    delta: Fraction
    length: int
    approximate: bool  # endpoints differed (within tolerance) instead of matching
    gaps: list[int] = field(default_factory=list)


def check_tubular_same_base(ball: CayleyBall, w1: str, w2: str,
                            delta) -> SameBaseReport:
    """Coordinatewise gaps between two equal-length geodesic words from e.

    For two geodesics to the same endpoint the gap must stay within
    2*delta; endpoints merely within 2*delta of each other are accepted
    and flagged as the approximate regime.
    """
    oracle = ball.oracle
    delta = Fraction(delta)
    if len(w1) != len(w2):
        raise OutOfRange("words must have equal length")
    for w in (w1, w2):
        if not oracle.is_geodesic_word(w):
            raise NotGeodesic(f"{w!r} is not geodesic")
    end_gap = oracle.distance_words(w1, w2)
    if end_gap > 2 * delta:
        raise OutOfRange(
            f"endpoints are {end_gap} apart, beyond the 2*delta tolerance")
    gaps = [oracle.distance_words(w1[:n], w2[:n]) for n in range(len(w1) + 1)]
    max_gap = max(gaps)
    return SameBaseReport(max_gap=max_gap, ok=max_gap <= 2 * delta,
                          delta=delta, length=len(w1),
                          approximate=end_gap > 0, gaps=gaps)


@dataclass
class GeneralTubularReport:
    T0: Optional[int]
    T1: Optional[int]
    ok_travel: bool
    ok_bound: bool
    bound: Fraction
    window: int
    max_gap: Optional[int]
    searched: int
    d0: int


def check_tubular_general(ball: CayleyBall, base1: str, ray1: RaySurrogate,
                          base2: str, ray2: RaySurrogate, delta,
                          window: int = 4,
                          search_bound: Optional[int] = None) -> GeneralTubularReport:
    """Search for shift offsets aligning two rays to the same boundary point.

    Finds the lexicographically least pair (T0, T1) such that
    d(x_{T0+n}, y_{T1+n}) <= 5*delta for all n = 0..window, where x and
    y are the rays translated to base1 and base2.  ``ok_bound`` checks
    the found pair against 2*(d(x_0, y_0) + 3*delta + 2); absence of any
    pair inside the searched range is reported, not raised.
    """
    oracle = ball.oracle
    delta = Fraction(delta)
    d0 = oracle.distance_words(base1, base2)
    bound = 2 * (d0 + 3 * delta + 2)
    limit = search_bound if search_bound is not None else int(bound)
    five = 5 * delta

    best: Optional[tuple[int, int]] = None
    max_gap = None
    for t0 in range(limit + 1):
        if best:
            break
        if t0 + window > ray1.depth:
            break
        for t1 in range(limit + 1):
            if t1 + window > ray2.depth:
                break
            gaps = []
            ok = True
            for n in range(window + 1):
                g = oracle.distance_words(ray_vertex_word(base1, ray1, t0 + n),
                                          ray_vertex_word(base2, ray2, t1 + n))
                gaps.append(g)
                if g > five:
                    ok = False
                    break
            if ok:
                best = (t0, t1)
                max_gap = max(gaps)
                break
    if best is None:
        return GeneralTubularReport(None, None, False, False, bound, window,
                                    None, limit, d0)
    t0, t1 = best
    return GeneralTubularReport(t0, t1, True, t0 <= bound and t1 <= bound,
                                bound, window, max_gap, limit, d0)


def substitute_geodesic(ball: CayleyBall, ray: RaySurrogate, n0: int, n1: int,
                        replacement: str) -> RaySurrogate:
    """Replace the segment [n0, n1] of a ray by another geodesic segment.

    The replacement must be a geodesic word from the n0-th to the n1-th
    ray vertex.  The substituted word is asserted geodesic of the same
    length before being returned.
    """
    if not (0 <= n0 < n1 <= ray.depth):
        raise OutOfRange(f"need 0 <= n0 < n1 <= depth, got {n0}, {n1}")
    oracle = ball.oracle
    oracle.alphabet.validate(replacement)
    if len(replacement) != n1 - n0:
        raise NotGeodesicReplacement(
            f"replacement has length {len(replacement)}, segment is {n1 - n0}")
    if not oracle.is_geodesic_word(replacement):
        raise NotGeodesicReplacement(f"{replacement!r} is not geodesic")
    inv = oracle.alphabet.inverse_word
    if not oracle.is_trivial(inv(ray.prefix(n1)) + ray.prefix(n0) + replacement):
        raise NotGeodesicReplacement(
            "replacement does not join the segment endpoints")
    new_word = ray.prefix(n0) + replacement + ray.word[n1:]
    if oracle.geodesic_length(new_word) != len(new_word):
        # cannot happen for a genuine geodesic replacement
        raise NotGeodesic("substituted word failed the geodesic test")
    return RaySurrogate(new_word, ray.depth, ray.margin, seed=None)


def phi_hat(ball: CayleyBall, eta: RaySurrogate, N: int, M: int,
            slack: int) -> SigmaSequence:
    """Length-N prefix of the lex-least geodesic word of length M into the
    slack-ball around the M-th ray vertex.

    Every true ray from e to the surrogate's boundary point passes
    within 2*delta of that vertex at coordinate M, so with slack at
    least ceil(2*delta) the result is a lexicographic lower bound for
    the true minimal type sequence; ``stabilization_probe`` monitors how
    it settles as M grows.
    """
    if not (0 <= N <= M <= eta.depth):
        raise OutOfRange(f"need N <= M <= depth, got N={N}, M={M}, depth={eta.depth}")
    if M > ball.radius:
        raise OutOfRange(f"horizon {M} exceeds ball radius {ball.radius}")
    x = ball.locate_word(eta.prefix(M))
    near = ball.vertices_near(x, slack)
    targets = [v for v in near if ball.level[v] == M]
    if not targets:
        raise EmptyTargetSet("no level-M vertex within the slack ball")
    order_key = ball.oracle.alphabet.order_key
    best = min((ball.words[v] for v in targets), key=order_key)
    assert ball.oracle.is_geodesic_word(best)
    return SigmaSequence(best[:N], N, M, slack)


@dataclass
class StabilizationReport:
    horizons: list[int]
    prefixes: list[str]
    common_prefix_len: int
    stable: bool          # the length-N prefix is constant from some horizon on
    stable_from: Optional[int]


def stabilization_probe(ball: CayleyBall, eta: RaySurrogate, N: int,
                        horizons: Sequence[int], slack: int) -> StabilizationReport:
    """phi_hat at several horizons, with the common-prefix diagnostics."""
    horizons = sorted(horizons)
    prefixes = [phi_hat(ball, eta, N, M, slack).letters for M in horizons]
    common = prefixes[0]
    for p in prefixes[1:]:
        i = 0
        while i < min(len(common), len(p)) and common[i] == p[i]:
            i += 1
        common = common[:i]
    stable_from = None
    for idx in range(len(prefixes) - 1):
        if all(p == prefixes[idx] for p in prefixes[idx:]):
            stable_from = horizons[idx]
            break
    return StabilizationReport(list(horizons), prefixes, len(common),
                               stable_from is not None, stable_from)


def translate_ray(ball: CayleyBall, g: str, eta: RaySurrogate,
                  M: int) -> RaySurrogate:
    """Surrogate of the translated boundary point g * eta.

    The endpoint is g times the M-th ray vertex; the new word is its
    ShortLex normal form, and the margin shrinks by the length of g.
    """
    oracle = ball.oracle
    g_red = oracle.reduce(g)
    if len(g_red) + M > ball.radius:
        raise OutOfRange(f"|g| + M = {len(g_red) + M} exceeds radius {ball.radius}")
    if M > eta.depth:
        raise OutOfRange(f"horizon {M} beyond surrogate depth {eta.depth}")
    p = ball.locate_word(g_red + eta.prefix(M))
    word = ball.words[p]
    return RaySurrogate(word, ball.level[p], max(0, eta.margin - len(g_red)),
                        seed=None)


def same_boundary_point(oracle: GroupOracle, r1: RaySurrogate, r2: RaySurrogate,
                        delta, M: int):
    """Fellow-traveling identification of two surrogates at finite depth.

    Verdicts: "same" when d(x_n, y_n) <= 2*delta for all n in the window
    [M/2, min(depths, M)] (rays from a common basepoint to one boundary
    point satisfy this globally), "different" when some gap exceeds it,
    "unresolved" when the window is empty at this depth.
    """
    delta = Fraction(delta)
    lo = M // 2
    hi = min(r1.depth, r2.depth, M)
    if lo > hi:
        return "unresolved"
    tol = 2 * delta
    for n in range(lo, hi + 1):
        if oracle.distance_words(r1.prefix(n), r2.prefix(n)) > tol:
            return "different"
    return "same"


@dataclass
class BoundaryPoint:
    """One deduplicated translated boundary point with its witnesses."""

    witness: str                  # minimal-length translating element
    surrogate: RaySurrogate
    all_witnesses: tuple[str, ...]


@dataclass
class BoundaryBallResult:
    eta: RaySurrogate
    r: int
    M: int
    delta: Fraction
    points: list[BoundaryPoint]
    unresolved_pairs: list[tuple[str, str]]
    caveats: tuple[str, ...] = ("finite-depth identification",)


def boundary_ball(ball: CayleyBall, eta: RaySurrogate, r: int, M: int,
                  delta) -> BoundaryBallResult:
    """Translates of a boundary point by all |g| <= r, deduplicated.

    Translates are identified through the 2*delta fellow-traveling
    window [M/2, M]; the window start discounts the transient head of a
    translated ray.  Representatives carry the ShortLex-least witness.
    """
    if r + M > ball.radius:
        raise OutOfRange(f"r + M = {r + M} exceeds radius {ball.radius}")
    delta = Fraction(delta)
    oracle = ball.oracle
    order = oracle.alphabet.shortlex_key
    gs = sorted((ball.words[v] for v in range(ball.ball_size(r))), key=order)
    surrogates = [translate_ray(ball, g, eta, M) for g in gs]

    n = len(gs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    unresolved: list[tuple[str, str]] = []
    for i in range(n):
        for j in range(i + 1, n):
            verdict = same_boundary_point(oracle, surrogates[i], surrogates[j],
                                          delta, M)
            if verdict == "same":
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
            elif verdict == "unresolved":
                unresolved.append((gs[i], gs[j]))

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    points = []
    for root in sorted(groups):
        members = groups[root]
        rep = members[0]  # gs is shortlex-sorted, so the first witness is minimal
        points.append(BoundaryPoint(witness=gs[rep], surrogate=surrogates[rep],
                                    all_witnesses=tuple(gs[m] for m in members)))
    return BoundaryBallResult(eta=eta, r=r, M=M, delta=delta, points=points,
                              unresolved_pairs=unresolved)
