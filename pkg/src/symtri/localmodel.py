"""Classical simulators.

Two kinds of model live here.  :class:`TriangleLocalModel` is the
three-symbol model whose sources and response tables differ per party yet
whose observed distribution is fully symmetric.  :class:`SymmetricClassicalModel`
uses one source table and one response everywhere; it can be placed on a
ring of any size, which makes it the ground truth for every inflation
constraint.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .dist import DEFAULT_PRECISION, OUTCOMES, TRIPLES, constant
from .errors import ModelFileError, ResourceLimitError, WiringError
from .lin import format_fraction

PERMUTATIONS = tuple(itertools.permutations(range(3)))
SIGN_MAPS = ((1, -1), (-1, 1))
MAX_ALPHABET = 6
MATCH_TOLERANCE = 1e-8

# Response tables as printed for the three-symbol model.
APPENDIX_F_A = ((1, 0, 1), (0, 0, 0), (1, 1, 1))
APPENDIX_F_B = ((1, 1, 0), (0, 1, 0), (0, 0, 0))
APPENDIX_F_C = ((0, 1, 0), (1, 1, 0), (0, 0, 0))


@dataclass(frozen=True)
class Wiring:
    """``opposite[X]`` is the source party X does not see.

    Party X reads its table as ``f[u][v]`` with ``u`` the symbol of the
    lower-numbered source it sees, unless ``transpose[X]`` swaps the roles.
    """

    opposite: tuple[int, int, int] = (0, 1, 2)
    transpose: tuple[bool, bool, bool] = (False, False, False)

    def inputs(self, party: int) -> tuple[int, int]:
        seen = tuple(s for s in range(3) if s != self.opposite[party])
        return seen[::-1] if self.transpose[party] else seen

    def describe(self) -> str:
        names = "αβγ"
        parts = []
        for party, label in enumerate("abc"):
            r, c = self.inputs(party)
            parts.append(f"f_{label}[{names[r]}][{names[c]}]")
        return ", ".join(parts)


def all_conventions():
    """Every (wiring, sign map) pair: 6 source placements x 8 transposes x 2 sign maps."""
    for opp in PERMUTATIONS:
        for tr in itertools.product((False, True), repeat=3):
            for sm in SIGN_MAPS:
                yield Wiring(opp, tr), sm


@dataclass(frozen=True)
class TriangleLocalModel:
    sources: tuple[tuple, tuple, tuple]
    tables: tuple
    wiring: Wiring = Wiring()
    sign_map: tuple[int, int] = (1, -1)

    def __post_init__(self):
        if len(self.sources) != 3 or len(self.tables) != 3:
            raise ValueError("need three sources and three response tables")
        k = len(self.sources[0])
        for s in self.sources:
            if len(s) != k or any(v < 0 for v in s):
                raise ValueError("source rows must be nonnegative and of equal length")
        for f in self.tables:
            if len(f) != k or any(len(r) != k for r in f):
                raise ValueError(f"response tables must be {k}x{k}")
            if any(v not in (0, 1) for r in f for v in r):
                raise ValueError("response tables must be 0/1")
        if sorted(self.sign_map) != [-1, 1]:
            raise ValueError("sign_map must be a bijection onto {-1, +1}")

    @property
    def alphabet(self) -> int:
        return len(self.sources[0])

    def outcome(self, party: int, symbols: Sequence[int]) -> int:
        r, c = self.wiring.inputs(party)
        return self.sign_map[self.tables[party][symbols[r]][symbols[c]]]

    def response_key(self) -> tuple:
        """Induced outcome functions; conventions with equal keys are the same model."""
        k = self.alphabet
        return tuple(tuple(self.outcome(p, s) for s in itertools.product(range(k), repeat=3))
                     for p in range(3))


@dataclass(frozen=True)
class TriangleDistribution:
    p: dict
    e1: object
    e2: object
    e3: object

    @property
    def correlators(self):
        return self.e1, self.e2, self.e3

    def total(self):
        return sum(self.p.values())

    def permutation_defect(self):
        """Largest change in p under any permutation of the parties."""
        worst = 0
        for perm in PERMUTATIONS:
            for t in TRIPLES:
                moved = tuple(t[i] for i in perm)
                worst = max(worst, abs(self.p[t] - self.p[moved]))
        return worst


def _correlators(p):
    def avg(fn):
        return sum(fn(t) * v for t, v in p.items())

    one = [avg(lambda t, i=i: t[i]) for i in range(3)]
    two = [avg(lambda t, i=i, j=j: t[i] * t[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    three = avg(lambda t: t[0] * t[1] * t[2])
    return sum(one) / 3, sum(two) / 3, three


def simulate_triangle(model: TriangleLocalModel) -> TriangleDistribution:
    """Enumerate the ``k^3`` source symbol combinations exactly.

    Arithmetic follows the source entries: Fractions stay exact, mpf values
    use the ambient mpmath precision.
    """
    k = model.alphabet
    p = {t: 0 for t in TRIPLES}
    for symbols in itertools.product(range(k), repeat=3):
        w = model.sources[0][symbols[0]] * model.sources[1][symbols[1]] * model.sources[2][symbols[2]]
        if not w:
            continue
        t = tuple(model.outcome(party, symbols) for party in range(3))
        p[t] = p[t] + w
    return TriangleDistribution(p, *_correlators(p))


def appendix_sources(x, y):
    one = x * 0 + 1
    return ((x, one - x, 0 * one), (y, (one - y) / 2, (one - y) / 2), (one - x, x, 0 * one))


@dataclass(frozen=True)
class WiringMatch:
    model: TriangleLocalModel
    distribution: TriangleDistribution
    residuals: tuple
    equivalent: tuple   # every convention inducing the same functions


def find_conventions(sources, tables=(APPENDIX_F_A, APPENDIX_F_B, APPENDIX_F_C),
                     target=None, tol=MATCH_TOLERANCE) -> list[WiringMatch]:
    """All functionally distinct conventions whose correlators hit ``target``."""
    if target is None:
        target = (constant("E1C").value, mpmath.mpf(-1) / 3, constant("E3C").value)
    groups: dict[tuple, list] = {}
    for wiring, sm in all_conventions():
        model = TriangleLocalModel(tuple(sources), tuple(tables), wiring, sm)
        groups.setdefault(model.response_key(), []).append(model)
    matches = []
    for members in groups.values():
        model = members[0]
        dist = simulate_triangle(model)
        res = tuple(abs(a - b) for a, b in zip(dist.correlators, target))
        if all(r < tol for r in res):
            matches.append(WiringMatch(model, dist, res,
                                       tuple((m.wiring, m.sign_map) for m in members)))
    return matches


def resolve_wiring(precision: int = DEFAULT_PRECISION, tol: float = MATCH_TOLERANCE,
                   x=None, y=None, tables=None) -> WiringMatch:
    """Pick the unique reading of the printed tables that reproduces the target.

    Raises WiringError unless exactly one functionally distinct convention
    matches ``(E1C, -1/3, E3C)`` within ``tol``.
    """
    tables = tables or (APPENDIX_F_A, APPENDIX_F_B, APPENDIX_F_C)
    with mpmath.workprec(precision):
        x = constant("X_ROOT", precision).value if x is None else mpmath.mpf(x)
        y = constant("Y_VALUE", precision).value if y is None else mpmath.mpf(y)
        target = (constant("E1C", precision).value, mpmath.mpf(-1) / 3,
                  constant("E3C", precision).value)
        matches = find_conventions(appendix_sources(x, y), tables, target, tol)
    if len(matches) != 1:
        raise WiringError(f"{len(matches)} conventions reproduce the target; expected exactly one")
    return matches[0]


# ---------------------------------------------------------------------------
# symmetric models


@dataclass(frozen=True)
class SymmetricClassicalModel:
    """One source table ``source[l][r]`` and one response ``P(+1 | left, right)``.

    On a ring the source between nodes ``i`` and ``i+1`` sends ``l`` to node
    ``i`` and ``r`` to node ``i+1``; node ``i`` therefore sees the previous
    source's ``r`` as its left input and the next source's ``l`` as its right.
    """

    source: tuple
    response: tuple

    def __post_init__(self):
        k = len(self.source)
        if not 1 <= k <= MAX_ALPHABET:
            raise ResourceLimitError(f"alphabet size {k} outside [1, {MAX_ALPHABET}]")
        for name, tab in (("source", self.source), ("response", self.response)):
            if len(tab) != k or any(len(r) != k for r in tab):
                raise ValueError(f"{name} table must be {k}x{k}")
        if any(v < 0 for r in self.source for v in r) or sum(sum(r) for r in self.source) != 1:
            raise ValueError("source table must be nonnegative and sum to 1")
        if any(not 0 <= v <= 1 for r in self.response for v in r):
            raise ValueError("response probabilities must lie in [0, 1]")

    @property
    def alphabet(self) -> int:
        return len(self.source)

    def p_out(self, a: int, left: int, right: int):
        plus = self.response[left][right]
        return plus if a == 1 else 1 - plus

    def transfer(self, a: int):
        """``K_a[r][r'] = sum_l P(a | r, l) source[l][r']``."""
        k = self.alphabet
        return [[sum(self.p_out(a, r, l) * self.source[l][r2] for l in range(k))
                 for r2 in range(k)] for r in range(k)]


def _matmul(a, b):
    k = len(a)
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(k)] for i in range(k)]


def simulate_symmetric_ring(model: SymmetricClassicalModel, m: int) -> list:
    """Exact ``p_m`` indexed by word (node 0 most significant, bit 0 = +1).

    Each probability is the trace of a product of transfer matrices, one
    per node.
    """
    if m < 1 or m > 24:
        raise ResourceLimitError(f"ring size {m} outside [1, 24]")
    mats = {a: model.transfer(a) for a in OUTCOMES}
    k = model.alphabet
    out = [Fraction(0)] * (1 << m)
    # prefix products shared across words via an explicit stack
    ident = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    stack = [(0, 0, ident)]
    while stack:
        depth, word, prod = stack.pop()
        if depth == m:
            out[word] = sum(prod[i][i] for i in range(k))
            continue
        for bit, a in enumerate(OUTCOMES):
            stack.append((depth + 1, (word << 1) | bit, _matmul(prod, mats[a])))
    return out


def enumerate_symmetric_ring(model: SymmetricClassicalModel, m: int) -> list:
    """Brute-force counterpart of :func:`simulate_symmetric_ring` (small cases only)."""
    k = model.alphabet
    if (k * k) ** m > 10**6:
        raise ResourceLimitError("too many source tuples to enumerate")
    out = [Fraction(0)] * (1 << m)
    pairs = [(l, r) for l in range(k) for r in range(k)]
    for msgs in itertools.product(pairs, repeat=m):
        w = Fraction(1)
        for l, r in msgs:
            w *= model.source[l][r]
        if not w:
            continue
        partial = {0: w}
        for i in range(m):
            left, right = msgs[i - 1][1], msgs[i][0]
            nxt = {}
            for word, v in partial.items():
                for bit, a in enumerate(OUTCOMES):
                    pa = model.p_out(a, left, right)
                    if pa:
                        key = (word << 1) | bit
                        nxt[key] = nxt.get(key, 0) + v * pa
            partial = nxt
        for word, v in partial.items():
            out[word] += v
    return out


def symmetric_triangle(model: SymmetricClassicalModel) -> TriangleDistribution:
    p3 = simulate_symmetric_ring(model, 3)
    p = {}
    for t in TRIPLES:
        word = 0
        for a in t:
            word = (word << 1) | (0 if a == 1 else 1)
        p[t] = p3[word]
    return TriangleDistribution(p, *_correlators(p))


def model_correlators(model: SymmetricClassicalModel) -> tuple[Fraction, Fraction]:
    """(E1, E2) seen by every node and every adjacent pair."""
    p2 = simulate_symmetric_ring(model, 3)
    e1 = sum((1 - 2 * ((w >> 2) & 1)) * v for w, v in enumerate(p2))
    e2 = sum((1 - 2 * ((w >> 2) & 1)) * (1 - 2 * ((w >> 1) & 1)) * v for w, v in enumerate(p2))
    return Fraction(e1), Fraction(e2)


def random_symmetric_model(rng: random.Random, k: int | None = None,
                           max_weight: int = 6, resolution: int = 6) -> SymmetricClassicalModel:
    """Random rational model with small denominators."""
    k = k or rng.choice((2, 3))
    weights = [[rng.randint(0, max_weight) for _ in range(k)] for _ in range(k)]
    total = sum(map(sum, weights))
    if total == 0:
        weights[0][0] = total = 1
    source = tuple(tuple(Fraction(w, total) for w in row) for row in weights)
    response = tuple(tuple(Fraction(rng.randint(0, resolution), resolution) for _ in range(k))
                     for _ in range(k))
    return SymmetricClassicalModel(source, response)


def uniform_model() -> SymmetricClassicalModel:
    """Outputs are fair coins: realizes (E1, E2) = (0, 0)."""
    return SymmetricClassicalModel(((Fraction(1),),), ((Fraction(1, 2),),))


def deterministic_model(sign: int = 1) -> SymmetricClassicalModel:
    """Every node outputs ``sign``: realizes (E1, E2) = (sign, 1)."""
    return SymmetricClassicalModel(((Fraction(1),),), ((Fraction(1 if sign == 1 else 0),),))


# ---------------------------------------------------------------------------
# model files


def _parse_row(line: str, table: str, lineno: int) -> list[Fraction]:
    try:
        return [Fraction(tok) for tok in line.split()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelFileError(f"line {lineno}: {exc}", table) from None


def loads_model(text: str):
    """Parse a ``kind triangle`` or ``kind symmetric`` model file.

    Layout: ``key value`` lines for ``kind`` and optional ``sign_map``/
    ``wiring``, and table headers (``sources``, ``f_a``, ``f_b``, ``f_c``
    or ``source``, ``response``) each followed by rows of ``num/den``.
    """
    kind = None
    tables: dict[str, list] = {}
    meta: dict[str, str] = {}
    current = None
    table_names = {"sources", "f_a", "f_b", "f_c", "source", "response"}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head in table_names and not rest:
            current = head
            tables[current] = []
        elif head in ("kind", "sign_map", "wiring"):
            meta[head] = rest.strip()
            current = None
        elif current is not None:
            tables[current].append(_parse_row(line, current, lineno))
        else:
            raise ModelFileError(f"line {lineno}: unexpected {line!r}", "header")
    kind = meta.get("kind")
    if kind == "symmetric":
        for name in ("source", "response"):
            if name not in tables:
                raise ModelFileError(f"missing table {name!r}", name)
        try:
            src = tuple(map(tuple, tables["source"]))
            k = len(src)
            if any(len(r) != k for r in src) or any(v < 0 for r in src for v in r) \
                    or sum(map(sum, src)) != 1:
                raise ValueError("must be a nonnegative square table summing to 1")
        except ValueError as exc:
            raise ModelFileError(str(exc), "source") from None
        try:
            return SymmetricClassicalModel(src, tuple(map(tuple, tables["response"])))
        except (ValueError, ResourceLimitError) as exc:
            raise ModelFileError(str(exc), "response") from None
    if kind != "triangle":
        raise ModelFileError(f"kind must be 'triangle' or 'symmetric', got {kind!r}", "header")
    for name in ("sources", "f_a", "f_b", "f_c"):
        if name not in tables:
            raise ModelFileError(f"missing table {name!r}", name)
    sources = tables["sources"]
    if len(sources) != 3:
        raise ModelFileError("need three source rows (alpha, beta, gamma)", "sources")
    k = len(sources[0])
    for row in sources:
        if len(row) != k or any(v < 0 for v in row) or sum(row) != 1:
            raise ModelFileError("each source row must be a probability vector of one length",
                                 "sources")
    fs = []
    for name in ("f_a", "f_b", "f_c"):
        f = tables[name]
        if len(f) != k or any(len(r) != k for r in f) or any(v not in (0, 1) for r in f for v in r):
            raise ModelFileError(f"must be a {k}x{k} table of 0/1 entries", name)
        fs.append(tuple(tuple(int(v) for v in r) for r in f))
    sign_map = (1, -1)
    if "sign_map" in meta:
        try:
            sign_map = tuple(int(v) for v in meta["sign_map"].split())
        except ValueError:
            raise ModelFileError("sign_map needs two integers", "sign_map") from None
        if sorted(sign_map) != [-1, 1]:
            raise ModelFileError("sign_map must map {0,1} onto {-1,+1}", "sign_map")
    wiring = Wiring()
    if "wiring" in meta:
        try:
            fields = dict(p.split("=", 1) for p in meta["wiring"].split())
            opp = tuple(int(v) for v in fields["opposite"].split(","))
            tr = tuple(bool(int(v)) for v in fields["transpose"].split(","))
            if sorted(opp) != [0, 1, 2] or len(tr) != 3:
                raise ValueError("bad shape")
        except (KeyError, ValueError):
            raise ModelFileError("expected 'wiring opposite=i,j,k transpose=t,t,t'", "wiring") \
                from None
        wiring = Wiring(opp, tr)
    return TriangleLocalModel(tuple(map(tuple, sources)), tuple(fs), wiring, sign_map)


def load_model(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFileError(str(exc), "file") from None
    return loads_model(text)


def _fmt(v) -> str:
    return format_fraction(Fraction(v))


def dumps_model(model) -> str:
    if isinstance(model, SymmetricClassicalModel):
        lines = ["kind symmetric", "source"]
        lines += [" ".join(map(_fmt, r)) for r in model.source]
        lines.append("response")
        lines += [" ".join(map(_fmt, r)) for r in model.response]
        return "\n".join(lines) + "\n"
    lines = ["kind triangle", "sources"]
    lines += [" ".join(map(_fmt, r)) for r in model.sources]
    for name, f in zip(("f_a", "f_b", "f_c"), model.tables):
        lines.append(name)
        lines += [" ".join(str(v) for v in r) for r in f]
    lines.append("sign_map " + " ".join(str(v) for v in model.sign_map))
    w = model.wiring
    lines.append("wiring opposite=" + ",".join(map(str, w.opposite))
                 + " transpose=" + ",".join(str(int(t)) for t in w.transpose))
    return "\n".join(lines) + "\n"


def rational_appendix_model(max_denominator: int = 10**12) -> TriangleLocalModel:
    """The resolved model with x and y rounded to nearby rationals."""
    match = resolve_wiring()
    x = constant("X_ROOT", max_denominator=max_denominator).rational
    y = constant("Y_VALUE", max_denominator=max_denominator).rational
    m = match.model
    return TriangleLocalModel(appendix_sources(x, y), m.tables, m.wiring, m.sign_map)
