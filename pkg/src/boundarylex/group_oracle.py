"""Ordered symmetric generating alphabets and exact word-problem oracles.

Words are plain Python strings over single-character letters.  By
convention a lowercase letter is a generator and the matching uppercase
letter is its inverse; a letter may instead be declared self-inverse
(an order-2 generator).  Every lexicographic decision in the package is
made against the alphabet's fixed letter order, *not* against ASCII;
the default order is a < A < b < B < ...

Three group families are supported, each with an exact triviality
decision:

* ``FreeGroupOracle``      -- free reduction; reduced words are normal forms.
* ``FreeProductOfCyclicsOracle`` -- free products Z/m1 * ... * Z/mk with the
  alternating-syllable normal form.
* ``SmallCancellationOracle``    -- finite presentations satisfying the metric
  C'(1/6) condition, decided by Dehn's algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    ConfigError,
    NotSmallCancellation,
    ResourceLimit,
    SmallCancellationViolation,
    UnknownLetter,
)

DEFAULT_CLOSURE_LIMIT = 4096


def _default_order(letters: Iterable[str]) -> list[str]:
    # lowercase immediately followed by its uppercase inverse: a A b B c C ...
    return sorted(set(letters), key=lambda ch: (ch.lower(), ch.isupper()))


@dataclass(frozen=True)
class Alphabet:
    """An ordered symmetric generating set.

    ``letters`` fixes the total order used for all lexicographic
    comparisons.  ``inv_letters`` is the parallel tuple of inverses and
    must be an involution; a letter equal to its own inverse encodes an
    order-2 generator.
    """

    letters: tuple[str, ...]
    inv_letters: tuple[str, ...]
    _inv: dict = field(default_factory=dict, compare=False, repr=False)
    _order: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(set(self.letters)) != len(self.letters):
            raise ConfigError("alphabet letters must be distinct")
        if len(self.inv_letters) != len(self.letters):
            raise ConfigError("inv_letters must parallel letters")
        inv = dict(zip(self.letters, self.inv_letters))
        for s, t in inv.items():
            if t not in inv or inv[t] != s:
                raise ConfigError(f"inverse map is not an involution at {s!r}")
        object.__setattr__(self, "_inv", inv)
        object.__setattr__(self, "_order", {s: i for i, s in enumerate(self.letters)})

    def __len__(self) -> int:
        return len(self.letters)

    def __contains__(self, letter: str) -> bool:
        return letter in self._order

    def inverse(self, letter: str) -> str:
        try:
            return self._inv[letter]
        except KeyError:
            raise UnknownLetter(f"letter {letter!r} not in alphabet") from None

    def inverse_word(self, word: str) -> str:
        return "".join(self._inv[ch] for ch in reversed(word))

    def index(self, letter: str) -> int:
        try:
            return self._order[letter]
        except KeyError:
            raise UnknownLetter(f"letter {letter!r} not in alphabet") from None

    def order_key(self, word: str) -> tuple[int, ...]:
        """Sort key realizing the alphabet's lexicographic order on words."""
        return tuple(self._order[ch] for ch in word)

    def shortlex_key(self, word: str):
        return (len(word), self.order_key(word))

    def validate(self, word: str) -> None:
        for ch in word:
            if ch not in self._order:
                raise UnknownLetter(f"letter {ch!r} not in alphabet")

    def reorder(self, letter_order: Sequence[str]) -> "Alphabet":
        """Same letters and inverses under a different total order."""
        if sorted(letter_order) != sorted(self.letters):
            raise ConfigError("letter_order must be a permutation of the alphabet")
        inv = [self._inv[ch] for ch in letter_order]
        return Alphabet(tuple(letter_order), tuple(inv))


def symmetric_alphabet(pairs: Sequence[tuple[str, Optional[str]]],
                       letter_order: Optional[Sequence[str]] = None) -> Alphabet:
    """Build an alphabet from (generator, inverse-or-None) pairs.

    ``None`` marks a self-inverse generator.  Default order interleaves
    inverses after their generators: a A b B ...
    """
    letters: list[str] = []
    inv: dict[str, str] = {}
    for lo, hi in pairs:
        if hi is None or hi == lo:
            letters.append(lo)
            inv[lo] = lo
        else:
            letters.extend([lo, hi])
            inv[lo] = hi
            inv[hi] = lo
    order = list(letter_order) if letter_order is not None else _default_order(letters)
    return Alphabet(tuple(order), tuple(inv[ch] for ch in order))


def free_reduce(alphabet: Alphabet, word: str) -> str:
    """Cancel adjacent s * inv(s) pairs until none remain."""
    alphabet.validate(word)
    out: list[str] = []
    for ch in word:
        if out and out[-1] == alphabet.inverse(ch):
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


class GroupOracle:
    """A finitely generated group with an exact word-problem decision.

    Subclasses provide ``reduce`` (some geodesic representative of the
    same element; never longer than the input) and, when the family
    admits cheap canonical forms, ``element_key``.
    """

    family = "abstract"
    unique_geodesics = False
    has_canonical_keys = False

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    # -- core decisions -------------------------------------------------

    def reduce(self, word: str) -> str:
        raise NotImplementedError

    def element_key(self, word: str):
        """Canonical hashable key of the element represented by ``word``."""
        raise NotImplementedError(f"{self.family} oracle has no canonical key")

    def is_trivial(self, word: str) -> bool:
        return not self.reduce(word)

    def geodesic_length(self, word: str) -> int:
        return len(self.reduce(word))

    def is_geodesic_word(self, word: str) -> bool:
        self.alphabet.validate(word)
        return self.geodesic_length(word) == len(word)

    def distance_words(self, u: str, v: str) -> int:
        """Graph distance between the elements spelled by u and v."""
        return self.geodesic_length(self.alphabet.inverse_word(u) + v)

    def candidate_info(self, word: str):
        """(geodesic length, element key) computed in one pass where possible."""
        return self.geodesic_length(word), self.element_key(word)

    def describe(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"


class FreeGroupOracle(GroupOracle):
    """Free group of finite rank; reduced words are ShortLex normal forms."""

    family = "free"
    unique_geodesics = True
    has_canonical_keys = True

    def __init__(self, rank: int = 2, alphabet: Optional[Alphabet] = None):
        if alphabet is None:
            if rank < 1 or rank > 26:
                raise ConfigError("rank must be between 1 and 26")
            names = [chr(ord("a") + i) for i in range(rank)]
            alphabet = symmetric_alphabet([(n, n.upper()) for n in names])
        else:
            if any(alphabet.inverse(s) == s for s in alphabet.letters):
                raise ConfigError("free groups have no order-2 generators")
        super().__init__(alphabet)
        self.rank = len(alphabet) // 2

    def reduce(self, word: str) -> str:
        return free_reduce(self.alphabet, word)

    def element_key(self, word: str):
        return self.reduce(word)

    def describe(self) -> dict:
        return {"family": "free", "rank": self.rank,
                "letter_order": "".join(self.alphabet.letters)}


class FreeProductOfCyclicsOracle(GroupOracle):
    """Free product Z/m1 * ... * Z/mk, each factor on one generator.

    An order-2 factor contributes a single self-inverse letter; larger
    factors contribute a generator/inverse pair.  Elements are stored as
    alternating syllable sequences ((factor, exponent), ...) with
    exponents in 1..m-1, which is the classical normal form.
    """

    family = "free_product_of_cyclics"
    has_canonical_keys = True

    def __init__(self, orders: Sequence[int],
                 letter_order: Optional[Sequence[str]] = None):
        orders = tuple(int(m) for m in orders)
        if not orders or any(m < 2 for m in orders):
            raise ConfigError("factor orders must all be >= 2")
        if len(orders) > 26:
            raise ConfigError("at most 26 factors supported")
        pairs = []
        for i, m in enumerate(orders):
            lo = chr(ord("a") + i)
            pairs.append((lo, None if m == 2 else lo.upper()))
        super().__init__(symmetric_alphabet(pairs, letter_order))
        self.orders = orders
        # letter -> (factor index, exponent step)
        self._step: dict[str, tuple[int, int]] = {}
        for i, m in enumerate(orders):
            lo = chr(ord("a") + i)
            self._step[lo] = (i, 1)
            if m != 2:
                self._step[lo.upper()] = (i, m - 1)
        # a geodesic word tie happens exactly at exponent m/2 of an even factor
        self.unique_geodesics = all(m == 2 or m % 2 == 1 for m in orders)

    def syllables(self, word: str) -> tuple[tuple[int, int], ...]:
        self.alphabet.validate(word)
        syl: list[list[int]] = []
        for ch in word:
            f, e = self._step[ch]
            m = self.orders[f]
            if syl and syl[-1][0] == f:
                syl[-1][1] = (syl[-1][1] + e) % m
                if syl[-1][1] == 0:
                    syl.pop()
            else:
                syl.append([f, e % m])
        return tuple((f, e) for f, e in syl)

    def _syllable_word(self, f: int, e: int) -> str:
        m = self.orders[f]
        lo = chr(ord("a") + f)
        if e < m - e:
            return lo * e
        if e > m - e:
            return lo.upper() * (m - e)
        if m == 2:
            return lo
        # both s^e and S^e are geodesic; take the lex-least under the letter order
        return min(lo * e, lo.upper() * e, key=self.alphabet.order_key)

    def reduce(self, word: str) -> str:
        return "".join(self._syllable_word(f, e) for f, e in self.syllables(word))

    def element_key(self, word: str):
        return self.syllables(word)

    def candidate_info(self, word: str):
        syl = self.syllables(word)
        length = sum(min(e, self.orders[f] - e) for f, e in syl)
        return length, syl

    def geodesic_length(self, word: str) -> int:
        return self.candidate_info(word)[0]

    def describe(self) -> dict:
        return {"family": "free_product_of_cyclics", "orders": list(self.orders),
                "letter_order": "".join(self.alphabet.letters)}


def _cyclic_reduce(alphabet: Alphabet, word: str) -> str:
    w = free_reduce(alphabet, word)
    while len(w) >= 2 and w[0] == alphabet.inverse(w[-1]):
        w = w[1:-1]
    return w


class SmallCancellationOracle(GroupOracle):
    """Finite presentation satisfying metric C'(1/6); Dehn's algorithm.

    The symmetrized relator set (all cyclic rotations of the relators
    and their inverses) is checked for the strict piece condition at
    construction time: every common prefix of two distinct symmetrized
    occurrences must be shorter than |r|/6 for both relators involved.
    Under C'(1/6) a freely reduced word is geodesic iff it contains no
    subword matching strictly more than half of a symmetrized relator,
    so ``reduce`` (Dehn reduction) returns geodesic representatives and
    decides triviality exactly.

    When every relator has even length, two geodesic words of the same
    element differ by replacements of half a relator by the inverted
    other half; closing a geodesic word under these length-preserving
    moves and taking the lex-least word yields a canonical key.  The
    completeness of this closure is an assumption of the fast key path;
    ball construction cross-checks it and fails loudly on violation.
    """

    family = "small_cancellation"
    unique_geodesics = False

    def __init__(self, relators: Sequence[str],
                 alphabet: Optional[Alphabet] = None,
                 letter_order: Optional[Sequence[str]] = None,
                 closure_limit: int = DEFAULT_CLOSURE_LIMIT):
        if not relators:
            raise ConfigError("at least one relator is required")
        if alphabet is None:
            base = sorted({ch.lower() for r in relators for ch in r})
            alphabet = symmetric_alphabet([(b, b.upper()) for b in base], letter_order)
        super().__init__(alphabet)
        self.relators = tuple(relators)
        self.closure_limit = closure_limit

        labelled: list[str] = []
        for r in relators:
            w = _cyclic_reduce(alphabet, r)
            if not w:
                raise ConfigError(f"relator {r!r} is trivial after cyclic reduction")
            for base_word in (w, alphabet.inverse_word(w)):
                for i in range(len(base_word)):
                    labelled.append(base_word[i:] + base_word[:i])
        self._check_sixth(labelled)
        self.symmetrized = tuple(dict.fromkeys(labelled))

        # seg -> lex-least strictly-shorter complement (Dehn replacement)
        self._replacements: dict[str, str] = {}
        self._replace_lengths: set[int] = set()
        # even relators only: seg of length |r|/2 -> alternative halves
        half_moves: dict[str, set[str]] = {}
        for r in self.symmetrized:
            n = len(r)
            for ell in range(n // 2 + 1, n + 1):
                seg, rest = r[:ell], r[ell:]
                comp = alphabet.inverse_word(rest)
                cur = self._replacements.get(seg)
                if cur is None or alphabet.order_key(comp) < alphabet.order_key(cur):
                    self._replacements[seg] = comp
                self._replace_lengths.add(ell)
            if n % 2 == 0:
                seg, rest = r[: n // 2], r[n // 2:]
                half_moves.setdefault(seg, set()).add(alphabet.inverse_word(rest))
        self._lengths_desc = sorted(self._replace_lengths, reverse=True)
        self.has_canonical_keys = all(len(r) % 2 == 0 for r in self.symmetrized)
        self._half_moves = {seg: tuple(sorted(alts, key=alphabet.order_key))
                            for seg, alts in half_moves.items()}
        self._half_lengths = sorted({len(r) // 2 for r in self.symmetrized
                                     if len(r) % 2 == 0})

    def _check_sixth(self, labelled: list[str]) -> None:
        for i in range(len(labelled)):
            for j in range(i + 1, len(labelled)):
                a, b = labelled[i], labelled[j]
                lcp = 0
                for x, y in zip(a, b):
                    if x != y:
                        break
                    lcp += 1
                if 6 * lcp >= len(a) or 6 * lcp >= len(b):
                    raise SmallCancellationViolation(
                        f"piece {a[:lcp]!r} of length {lcp} violates C'(1/6) "
                        f"for relators of lengths {len(a)}, {len(b)}")

    # -- Dehn's algorithm ------------------------------------------------

    def dehn_reduce(self, word: str) -> str:
        """Replace >half relator subwords by the shorter complement until none remain.

        Deterministic: leftmost match first, longest match at that
        position, lex-least complement on ties (ties were resolved at
        table build time).  The output is geodesic under C'(1/6).
        """
        w = free_reduce(self.alphabet, word)
        while True:
            n = len(w)
            hit = None
            for i in range(n):
                for ell in self._lengths_desc:
                    if i + ell > n:
                        continue
                    comp = self._replacements.get(w[i:i + ell])
                    if comp is not None:
                        hit = (i, ell, comp)
                        break
                if hit:
                    break
            if not hit:
                return w
            i, ell, comp = hit
            w = free_reduce(self.alphabet, w[:i] + comp + w[i + ell:])

    def reduce(self, word: str) -> str:
        return self.dehn_reduce(word)

    def geodesic_closure(self, word: str) -> set[str]:
        """All words reachable from a geodesic word by half-relator swaps."""
        seen = {word}
        stack = [word]
        while stack:
            u = stack.pop()
            for h in self._half_lengths:
                for i in range(len(u) - h + 1):
                    for alt in self._half_moves.get(u[i:i + h], ()):
                        v = u[:i] + alt + u[i + h:]
                        if v not in seen:
                            if len(seen) >= self.closure_limit:
                                raise ResourceLimit("geodesic closure too large")
                            seen.add(v)
                            stack.append(v)
        return seen

    def element_key(self, word: str):
        if not self.has_canonical_keys:
            raise NotImplementedError("canonical keys need even-length relators")
        w = self.dehn_reduce(word)
        return min(self.geodesic_closure(w), key=self.alphabet.order_key)

    def candidate_info(self, word: str):
        w = self.dehn_reduce(word)
        return len(w), min(self.geodesic_closure(w), key=self.alphabet.order_key)

    def describe(self) -> dict:
        return {"family": "small_cancellation", "relators": list(self.relators),
                "letter_order": "".join(self.alphabet.letters)}


def dehn_reduce(oracle: GroupOracle, word: str) -> str:
    """Module-level Dehn reduction; rejects non small-cancellation oracles."""
    if not isinstance(oracle, SmallCancellationOracle):
        raise NotSmallCancellation(f"{oracle.family} oracle has no Dehn algorithm")
    return oracle.dehn_reduce(word)


def is_trivial(oracle: GroupOracle, word: str) -> bool:
    return oracle.is_trivial(word)


def oracle_from_description(desc: dict) -> GroupOracle:
    family = desc.get("family")
    order = list(desc["letter_order"]) if "letter_order" in desc else None
    if family == "free":
        oracle = FreeGroupOracle(int(desc["rank"]))
        if order:
            oracle = FreeGroupOracle(int(desc["rank"]),
                                     alphabet=oracle.alphabet.reorder(order))
        return oracle
    if family == "free_product_of_cyclics":
        return FreeProductOfCyclicsOracle(desc["orders"], letter_order=order)
    if family == "small_cancellation":
        return SmallCancellationOracle(desc["relators"], letter_order=order)
    raise ConfigError(f"unknown family {family!r}")


def parse_presentation(text: str) -> GroupOracle:
    """Parse the line-oriented presentation config shared by CLI and library.

    Recognized keys::

        generators: a b c d
        involutions: a:A b:B
        self: a
        orders: b=3 c=4
        relators: abABcdCD
        letter_order: a A b B ...

    Relators select the small-cancellation family, orders (plus
    ``self``, read as order 2) the free product of cyclics, otherwise
    the group is free on the listed generators.
    """
    fields: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"line {lineno}: expected 'key: value'")
        key, value = line.split(":", 1)
        fields.setdefault(key.strip(), []).extend(value.split())

    generators = fields.get("generators", [])
    if not generators:
        raise ConfigError("missing 'generators:' line")
    for g in generators:
        if len(g) != 1 or not g.islower():
            raise ConfigError(f"generators must be single lowercase letters, got {g!r}")
    self_inverse = set(fields.get("self", []))
    involutions = {}
    for pair in fields.get("involutions", []):
        if ":" not in pair:
            raise ConfigError(f"bad involution {pair!r}, expected g:G")
        lo, hi = pair.split(":", 1)
        involutions[lo] = hi
    order = fields.get("letter_order") or None

    if "relators" in fields:
        pairs = [(g, None if g in self_inverse else involutions.get(g, g.upper()))
                 for g in generators]
        alphabet = symmetric_alphabet(pairs, order)
        return SmallCancellationOracle(fields["relators"], alphabet=alphabet,
                                       letter_order=None)

    if "orders" in fields or self_inverse:
        orders: dict[str, int] = {g: 2 for g in self_inverse}
        for spec in fields.get("orders", []):
            if "=" not in spec:
                raise ConfigError(f"bad order spec {spec!r}, expected g=n")
            g, n = spec.split("=", 1)
            orders[g] = int(n)
        missing = [g for g in generators if g not in orders]
        if missing:
            raise ConfigError(f"no order given for generators {missing}")
        if generators != sorted(generators):
            raise ConfigError("free-product generators must be a b c ... in order")
        if generators != [chr(ord('a') + i) for i in range(len(generators))]:
            raise ConfigError("free-product generators must be consecutive from 'a'")
        return FreeProductOfCyclicsOracle([orders[g] for g in generators],
                                          letter_order=order)

    pairs = [(g, involutions.get(g, g.upper())) for g in generators]
    alphabet = symmetric_alphabet(pairs, order)
    return FreeGroupOracle(len(generators), alphabet=alphabet)
