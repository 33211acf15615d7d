"""Grade algebras: ordered semirings with a least zero.

A grade algebra is a carrier with a partial order, a commutative additive
monoid, a multiplicative monoid, distributivity, annihilating zero,
monotone operations, and zero as the least element.  Built-in instances:
naturals, the trivial one-point algebra, affinity {0,1,w}, booleans,
extended non-negative rationals, plus finite tables, binary products and
the infinity extension of any algebra.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Optional


class GradeError(Exception):
    """Base class for grade-level failures."""


class CarrierMismatch(GradeError):
    """A value was used with an algebra it does not belong to."""


class PartialMap(GradeError):
    """A finite homomorphism map misses an element of its source."""


class AmbiguousResidual(GradeError):
    """A residual query has several incomparable maximal answers."""

    def __init__(self, candidates):
        super().__init__(f"ambiguous residual, maximal candidates: {candidates}")
        self.candidates = candidates


# ---------------------------------------------------------------------------
# Values

@dataclass(frozen=True)
class GradeValue:
    pass


@dataclass(frozen=True)
class Nat(GradeValue):
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("naturals are non-negative")

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class Triv(GradeValue):
    """The single inhabitant of the trivial algebra."""

    def __str__(self):
        return "inf"


@dataclass(frozen=True)
class ExtReal(GradeValue):
    """Exact non-negative rational, or infinity when ``q`` is None."""

    q: Optional[Fraction]

    def __post_init__(self):
        if self.q is not None and self.q < 0:
            raise ValueError("extended reals are non-negative")

    def __str__(self):
        if self.q is None:
            return "inf"
        if self.q.denominator == 1:
            return str(self.q.numerator)
        return f"{self.q.numerator}/{self.q.denominator}"


@dataclass(frozen=True)
class FiniteElem(GradeValue):
    name: str
    algebra: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PairValue(GradeValue):
    left: GradeValue
    right: GradeValue

    def __str__(self):
        return f"({self.left},{self.right})"


@dataclass(frozen=True)
class ExtFin(GradeValue):
    inner: GradeValue

    def __str__(self):
        return str(self.inner)


@dataclass(frozen=True)
class ExtInf(GradeValue):
    def __str__(self):
        return "inf"


# ---------------------------------------------------------------------------
# Algebras

SAMPLE_SEED = 20240809  # fixed seed for deterministic law sampling


@dataclass(frozen=True)
class Algebra:
    """One grade algebra: order, sum, product and neutral elements."""

    def leq(self, a: GradeValue, b: GradeValue) -> bool:
        raise NotImplementedError

    def add(self, a: GradeValue, b: GradeValue) -> GradeValue:
        raise NotImplementedError

    def mul(self, a: GradeValue, b: GradeValue) -> GradeValue:
        raise NotImplementedError

    def zero(self) -> GradeValue:
        raise NotImplementedError

    def one(self) -> GradeValue:
        raise NotImplementedError

    def contains(self, a: GradeValue) -> bool:
        raise NotImplementedError

    def elements(self) -> Optional[list[GradeValue]]:
        """Full carrier for finite algebras, None otherwise."""
        return None

    def sample(self) -> list[GradeValue]:
        """Deterministic value pool used to test laws on infinite carriers."""
        elems = self.elements()
        if elems is None:
            raise NotImplementedError
        return elems

    def residual(self, available: GradeValue, demand: GradeValue) -> Optional[GradeValue]:
        """Canonical maximal s' with demand + s' <= available, if any."""
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def check_value(self, a: GradeValue) -> None:
        if not self.contains(a):
            raise CarrierMismatch(f"{a} is not a value of {self.describe()}")

    def parse_payload(self, text: str) -> GradeValue:
        raise NotImplementedError


@dataclass(frozen=True)
class NatAlgebra(Algebra):
    def leq(self, a, b):
        self.check_value(a), self.check_value(b)
        return a.n <= b.n

    def add(self, a, b):
        self.check_value(a), self.check_value(b)
        return Nat(a.n + b.n)

    def mul(self, a, b):
        self.check_value(a), self.check_value(b)
        return Nat(a.n * b.n)

    def zero(self):
        return Nat(0)

    def one(self):
        return Nat(1)

    def contains(self, a):
        return isinstance(a, Nat)

    def sample(self):
        return [Nat(n) for n in range(51)]

    def residual(self, available, demand):
        self.check_value(available), self.check_value(demand)
        if demand.n <= available.n:
            return Nat(available.n - demand.n)
        return None

    def describe(self):
        return "nat"

    def parse_payload(self, text):
        if not text.lstrip("-").isdigit():
            raise ValueError(f"bad natural literal {text!r}")
        n = int(text)
        if n < 0:
            raise ValueError("naturals are non-negative")
        return Nat(n)


@dataclass(frozen=True)
class TrivialAlgebra(Algebra):
    def leq(self, a, b):
        self.check_value(a), self.check_value(b)
        return True

    def add(self, a, b):
        self.check_value(a), self.check_value(b)
        return Triv()

    def mul(self, a, b):
        self.check_value(a), self.check_value(b)
        return Triv()

    def zero(self):
        return Triv()

    def one(self):
        return Triv()

    def contains(self, a):
        return isinstance(a, Triv)

    def elements(self):
        return [Triv()]

    def residual(self, available, demand):
        self.check_value(available), self.check_value(demand)
        return Triv()

    def describe(self):
        return "trivial"

    def parse_payload(self, text):
        if text != "inf":
            raise ValueError(f"the trivial algebra only has 'inf', got {text!r}")
        return Triv()


@dataclass(frozen=True)
class ExtRealAlgebra(Algebra):
    def leq(self, a, b):
        self.check_value(a), self.check_value(b)
        if b.q is None:
            return True
        if a.q is None:
            return False
        return a.q <= b.q

    def add(self, a, b):
        self.check_value(a), self.check_value(b)
        if a.q is None or b.q is None:
            return ExtReal(None)
        return ExtReal(a.q + b.q)

    def mul(self, a, b):
        self.check_value(a), self.check_value(b)
        # 0 annihilates even against infinity
        if a.q == 0 or b.q == 0:
            return ExtReal(Fraction(0))
        if a.q is None or b.q is None:
            return ExtReal(None)
        return ExtReal(a.q * b.q)

    def zero(self):
        return ExtReal(Fraction(0))

    def one(self):
        return ExtReal(Fraction(1))

    def contains(self, a):
        return isinstance(a, ExtReal)

    def sample(self):
        pool = [ExtReal(None)]
        for den in (1, 2, 3, 4, 7, 16):
            for num in range(0, 9):
                pool.append(ExtReal(Fraction(num, den)))
        return sorted(set(pool), key=lambda v: (v.q is None, v.q or 0))

    def residual(self, available, demand):
        self.check_value(available), self.check_value(demand)
        if available.q is None:
            return ExtReal(None)
        if demand.q is None or demand.q > available.q:
            return None
        return ExtReal(available.q - demand.q)

    def describe(self):
        return "extreal"

    def parse_payload(self, text):
        if text == "inf":
            return ExtReal(None)
        return ExtReal(Fraction(text))


@dataclass(frozen=True)
class FiniteTable:
    """Explicit description of a finite algebra.

    ``leq`` must already be reflexive and transitive: the validator rejects
    incomplete relations instead of repairing them, so that configuration
    mistakes surface.
    """

    name: str
    elements: tuple[str, ...]
    leq: frozenset[tuple[str, str]]
    sum: dict[str, dict[str, str]] = field(hash=False)
    mul: dict[str, dict[str, str]] = field(hash=False)
    zero: str
    one: str

    def __eq__(self, other):
        if not isinstance(other, FiniteTable):
            return NotImplemented
        return (self.name, self.elements, self.leq, self.sum, self.mul,
                self.zero, self.one) == (other.name, other.elements, other.leq,
                                         other.sum, other.mul, other.zero, other.one)

    def __hash__(self):
        return hash((self.name, self.elements, self.leq, self.zero, self.one))


@dataclass(frozen=True)
class FiniteAlgebra(Algebra):
    table: FiniteTable

    def _value(self, name: str) -> FiniteElem:
        return FiniteElem(name, self.table.name)

    def leq(self, a, b):
        self.check_value(a), self.check_value(b)
        return (a.name, b.name) in self.table.leq

    def add(self, a, b):
        self.check_value(a), self.check_value(b)
        return self._value(self.table.sum[a.name][b.name])

    def mul(self, a, b):
        self.check_value(a), self.check_value(b)
        return self._value(self.table.mul[a.name][b.name])

    def zero(self):
        return self._value(self.table.zero)

    def one(self):
        return self._value(self.table.one)

    def contains(self, a):
        return (isinstance(a, FiniteElem) and a.algebra == self.table.name
                and a.name in self.table.elements)

    def elements(self):
        return [self._value(n) for n in self.table.elements]

    def residual(self, available, demand):
        self.check_value(available), self.check_value(demand)
        valid = [s for s in self.elements()
                 if self.leq(self.add(demand, s), available)]
        maximal = [s for s in valid
                   if not any(t != s and self.leq(s, t) for t in valid)]
        if not maximal:
            return None
        if len(maximal) > 1:
            raise AmbiguousResidual(maximal)
        return maximal[0]

    def describe(self):
        return f"table:{self.table.name}"

    def parse_payload(self, text):
        if text not in self.table.elements:
            raise ValueError(f"{text!r} is not an element of {self.table.name}")
        return self._value(text)


@dataclass(frozen=True)
class ProductAlgebra(Algebra):
    left: Algebra
    right: Algebra

    def leq(self, a, b):
        self.check_value(a), self.check_value(b)
        return self.left.leq(a.left, b.left) and self.right.leq(a.right, b.right)

    def add(self, a, b):
        self.check_value(a), self.check_value(b)
        return PairValue(self.left.add(a.left, b.left), self.right.add(a.right, b.right))

    def mul(self, a, b):
        self.check_value(a), self.check_value(b)
        return PairValue(self.left.mul(a.left, b.left), self.right.mul(a.right, b.right))

    def zero(self):
        return PairValue(self.left.zero(), self.right.zero())

    def one(self):
        return PairValue(self.left.one(), self.right.one())

    def contains(self, a):
        return (isinstance(a, PairValue) and self.left.contains(a.left)
                and self.right.contains(a.right))

    def elements(self):
        le, re_ = self.left.elements(), self.right.elements()
        if le is None or re_ is None:
            return None
        return [PairValue(l, r) for l, r in iproduct(le, re_)]

    def sample(self):
        le = self.left.elements() or self.left.sample()[:8]
        re_ = self.right.elements() or self.right.sample()[:8]
        return [PairValue(l, r) for l, r in iproduct(le, re_)]

    def residual(self, available, demand):
        self.check_value(available), self.check_value(demand)
        rl = self.left.residual(available.left, demand.left)
        rr = self.right.residual(available.right, demand.right)
        if rl is None or rr is None:
            return None
        return PairValue(rl, rr)

    def describe(self):
        return f"product({self.left.describe()},{self.right.describe()})"

    def parse_payload(self, text):
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise ValueError(f"product grade literal must be (l,r), got {text!r}")
        depth, split = 0, None
        body = text[1:-1]
        for i, ch in enumerate(body):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                split = i
                break
        if split is None:
            raise ValueError(f"product grade literal must be (l,r), got {text!r}")
        return PairValue(self.left.parse_payload(body[:split].strip()),
                         self.right.parse_payload(body[split + 1:].strip()))


@dataclass(frozen=True)
class ExtendAlgebra(Algebra):
    """Adjoin a top infinity; 0 * inf = inf * 0 = 0 is kept."""

    inner: Algebra

    def leq(self, a, b):
        self.check_value(a), self.check_value(b)
        if isinstance(b, ExtInf):
            return True
        if isinstance(a, ExtInf):
            return False
        return self.inner.leq(a.inner, b.inner)

    def add(self, a, b):
        self.check_value(a), self.check_value(b)
        if isinstance(a, ExtInf) or isinstance(b, ExtInf):
            return ExtInf()
        return ExtFin(self.inner.add(a.inner, b.inner))

    def mul(self, a, b):
        self.check_value(a), self.check_value(b)
        if isinstance(a, ExtInf) or isinstance(b, ExtInf):
            if a == self.zero() or b == self.zero():
                return self.zero()
            return ExtInf()
        return ExtFin(self.inner.mul(a.inner, b.inner))

    def zero(self):
        return ExtFin(self.inner.zero())

    def one(self):
        return ExtFin(self.inner.one())

    def contains(self, a):
        if isinstance(a, ExtInf):
            return True
        return isinstance(a, ExtFin) and self.inner.contains(a.inner)

    def elements(self):
        inner = self.inner.elements()
        if inner is None:
            return None
        return [ExtFin(v) for v in inner] + [ExtInf()]

    def sample(self):
        inner = self.inner.elements() or self.inner.sample()[:12]
        return [ExtFin(v) for v in inner] + [ExtInf()]

    def residual(self, available, demand):
        self.check_value(available), self.check_value(demand)
        if isinstance(available, ExtInf):
            return ExtInf()
        if isinstance(demand, ExtInf):
            return None
        r = self.inner.residual(available.inner, demand.inner)
        return None if r is None else ExtFin(r)

    def describe(self):
        return f"extend({self.inner.describe()})"

    def parse_payload(self, text):
        if text == "inf":
            return ExtInf()
        return ExtFin(self.inner.parse_payload(text))


def format_payload(alg: Algebra, value: GradeValue) -> str:
    alg.check_value(value)
    return str(value)


# ---------------------------------------------------------------------------
# Built-in finite tables

def _closure_table(elems, leq_pairs):
    pairs = set(leq_pairs)
    pairs.update((e, e) for e in elems)
    changed = True
    while changed:
        changed = False
        for a, b in list(pairs):
            for c, d in list(pairs):
                if b == c and (a, d) not in pairs:
                    pairs.add((a, d))
                    changed = True
    return frozenset(pairs)


def _table_from_ops(name, elems, leq_pairs, add_fn, mul_fn, zero, one):
    return FiniteTable(
        name=name,
        elements=tuple(elems),
        leq=_closure_table(elems, leq_pairs),
        sum={a: {b: add_fn(a, b) for b in elems} for a in elems},
        mul={a: {b: mul_fn(a, b) for b in elems} for a in elems},
        zero=zero,
        one=one,
    )


def affinity_table() -> FiniteTable:
    """{0,1,w}: naturals with everything above 1 collapsed to w."""
    rank = {"0": 0, "1": 1, "w": 2}
    back = {0: "0", 1: "1", 2: "w"}

    def add(a, b):
        return back[min(rank[a] + rank[b], 2)]

    def mul(a, b):
        return back[min(rank[a] * rank[b], 2)]

    return _table_from_ops("affinity", ["0", "1", "w"],
                           [("0", "1"), ("1", "w")], add, mul, "0", "1")


def boolean_table() -> FiniteTable:
    def disj(a, b):
        return "1" if "1" in (a, b) else "0"

    def conj(a, b):
        return "1" if a == b == "1" else "0"

    return _table_from_ops("boolean", ["0", "1"], [("0", "1")], disj, conj, "0", "1")


def _lattice_with_unused(name, levels, order_pairs, top):
    """Privacy-style algebra: a distributive lattice plus a least 'unused' 0.

    Sum is the join (least restrictive), multiplication the meet (most
    restrictive); the adjoined 0 is neutral for sum and absorbing for
    multiplication; the designated one is the top level.
    """
    elems = ["0"] + levels
    closure = _closure_table(elems, [("0", lv) for lv in levels] + order_pairs)

    def join(a, b):
        if a == "0":
            return b
        if b == "0":
            return a
        ups = [c for c in levels if (a, c) in closure and (b, c) in closure]
        least = [c for c in ups if all((c, d) in closure for d in ups)]
        assert len(least) == 1, f"{name}: no unique join for {a},{b}"
        return least[0]

    def meet(a, b):
        if "0" in (a, b):
            return "0"
        downs = [c for c in levels if (c, a) in closure and (c, b) in closure]
        greatest = [c for c in downs if all((d, c) in closure for d in downs)]
        assert len(greatest) == 1, f"{name}: no unique meet for {a},{b}"
        return greatest[0]

    return _table_from_ops(name, elems, order_pairs + [("0", lv) for lv in levels],
                           join, meet, "0", top)


def privacy_table() -> FiniteTable:
    """Two privacy levels: 0 < private < public."""
    return _lattice_with_unused("privacy2", ["private", "public"],
                                [("private", "public")], "public")


def pprivacy_table() -> FiniteTable:
    """Four privacy levels a < b,c < d (b,c incomparable) plus 0."""
    return _lattice_with_unused(
        "privacy4", ["a", "b", "c", "d"],
        [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")], "d")


NAT = NatAlgebra()
TRIVIAL = TrivialAlgebra()
EXTREAL = ExtRealAlgebra()
AFFINITY = FiniteAlgebra(affinity_table())
BOOLEAN = FiniteAlgebra(boolean_table())
PRIVACY = FiniteAlgebra(privacy_table())
PPRIVACY = FiniteAlgebra(pprivacy_table())


# ---------------------------------------------------------------------------
# Spec-level operation names

def alg_leq(spec: Algebra, a: GradeValue, b: GradeValue) -> bool:
    return spec.leq(a, b)


def alg_add(spec: Algebra, a: GradeValue, b: GradeValue) -> GradeValue:
    return spec.add(a, b)


def alg_mul(spec: Algebra, a: GradeValue, b: GradeValue) -> GradeValue:
    return spec.mul(a, b)


def alg_zero(spec: Algebra) -> GradeValue:
    return spec.zero()


def alg_one(spec: Algebra) -> GradeValue:
    return spec.one()


def residual(spec: Algebra, available: GradeValue, demand: GradeValue):
    return spec.residual(available, demand)


def all_residuals(spec: Algebra, available: GradeValue, demand: GradeValue) -> list[GradeValue]:
    """Every valid residual of a finite algebra, for enumeration/oracles."""
    elems = spec.elements()
    if elems is None:
        raise GradeError("all_residuals needs a finite carrier")
    return [s for s in elems if spec.leq(spec.add(demand, s), available)]


def iota(n: GradeValue, target: Algebra) -> GradeValue:
    """Sum of n copies of the target's one; the unique hom out of naturals."""
    if not isinstance(n, Nat):
        raise CarrierMismatch(f"iota expects a natural, got {n}")
    out = target.zero()
    for _ in range(n.n):
        out = target.add(out, target.one())
    return out


def zeta(a: GradeValue, source: Algebra) -> GradeValue:
    """The constant map into the trivial algebra."""
    source.check_value(a)
    return Triv()


# ---------------------------------------------------------------------------
# Homomorphisms

@dataclass(frozen=True)
class Hom:
    """A structure-preserving monotone map between two algebras."""

    def source(self) -> Algebra:
        raise NotImplementedError

    def target(self) -> Algebra:
        raise NotImplementedError

    def apply(self, a: GradeValue) -> GradeValue:
        raise NotImplementedError


@dataclass(frozen=True)
class IdentityHom(Hom):
    spec: Algebra

    def source(self):
        return self.spec

    def target(self):
        return self.spec

    def apply(self, a):
        self.spec.check_value(a)
        return a


@dataclass(frozen=True)
class IotaHom(Hom):
    target_spec: Algebra

    def source(self):
        return NAT

    def target(self):
        return self.target_spec

    def apply(self, a):
        return iota(a, self.target_spec)


@dataclass(frozen=True)
class ZetaHom(Hom):
    source_spec: Algebra

    def source(self):
        return self.source_spec

    def target(self):
        return TRIVIAL

    def apply(self, a):
        return zeta(a, self.source_spec)


@dataclass(frozen=True)
class ProjLeftHom(Hom):
    product: ProductAlgebra

    def source(self):
        return self.product

    def target(self):
        return self.product.left

    def apply(self, a):
        self.product.check_value(a)
        return a.left


@dataclass(frozen=True)
class ProjRightHom(Hom):
    product: ProductAlgebra

    def source(self):
        return self.product

    def target(self):
        return self.product.right

    def apply(self, a):
        self.product.check_value(a)
        return a.right


@dataclass(frozen=True)
class FiniteMapHom(Hom):
    source_spec: FiniteAlgebra
    target_spec: Algebra
    mapping: dict[str, GradeValue] = field(hash=False)

    def source(self):
        return self.source_spec

    def target(self):
        return self.target_spec

    def apply(self, a):
        self.source_spec.check_value(a)
        if a.name not in self.mapping:
            raise PartialMap(f"map has no image for element {a.name!r}")
        return self.mapping[a.name]


@dataclass(frozen=True)
class ComposeHom(Hom):
    """Apply ``first``, then ``second``."""

    first: Hom
    second: Hom

    def __post_init__(self):
        if self.first.target() != self.second.source():
            raise GradeError("composed homomorphisms do not agree at the joint: "
                             f"{self.first.target().describe()} vs "
                             f"{self.second.source().describe()}")

    def source(self):
        return self.first.source()

    def target(self):
        return self.second.target()

    def apply(self, a):
        return self.second.apply(self.first.apply(a))


def hom_apply(h: Hom, a: GradeValue) -> GradeValue:
    return h.apply(a)


def compose(first: Hom, second: Hom) -> Hom:
    if isinstance(first, IdentityHom):
        return second
    if isinstance(second, IdentityHom):
        return first
    return ComposeHom(first, second)


# ---------------------------------------------------------------------------
# Law validation

@dataclass
class LawResult:
    law: str
    ok: bool
    witness: Optional[tuple] = None

    def __str__(self):
        if self.ok:
            return f"PASS {self.law}"
        return f"FAIL {self.law} witness={self.witness}"


@dataclass
class LawReport:
    results: list[LawResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def failures(self) -> list[LawResult]:
        return [r for r in self.results if not r.ok]

    def __str__(self):
        return "\n".join(str(r) for r in self.results)


def _law_pool(spec: Algebra) -> list[GradeValue]:
    elems = spec.elements()
    return elems if elems is not None else spec.sample()


def _triples(pool: list, exhaustive: bool, minimum: int = 1000):
    if exhaustive:
        yield from iproduct(pool, pool, pool)
        return
    rng = random.Random(SAMPLE_SEED)
    count = max(minimum, len(pool))
    for _ in range(count):
        yield rng.choice(pool), rng.choice(pool), rng.choice(pool)


def validate_algebra(spec: Algebra, minimum_samples: int = 1000) -> LawReport:
    """Check every grade-algebra axiom; exhaustive on finite carriers.

    Infinite carriers are checked on a deterministic seeded sample of at
    least ``minimum_samples`` triples drawn from the documented pool.
    """
    results: list[LawResult] = []
    if isinstance(spec, FiniteAlgebra):
        shape = _validate_table_shape(spec.table)
        results.append(shape)
        if not shape.ok:
            return LawReport(results)
    pool = _law_pool(spec)
    exhaustive = spec.elements() is not None

    def check(law, fn, triples):
        for t in triples:
            if not fn(*t):
                results.append(LawResult(law, False, tuple(str(x) for x in t)))
                return
        results.append(LawResult(law, True))

    one = [(a,) for a in pool]
    pairs_src = list(iproduct(pool, pool)) if exhaustive else [
        (a, b) for a, b, _ in _triples(pool, False)]
    triples_src = list(_triples(pool, exhaustive))

    check("order-reflexive", lambda a: spec.leq(a, a), one)
    check("order-antisymmetric",
          lambda a, b: not (spec.leq(a, b) and spec.leq(b, a)) or a == b, pairs_src)
    check("order-transitive",
          lambda a, b, c: not (spec.leq(a, b) and spec.leq(b, c)) or spec.leq(a, c),
          triples_src)
    check("add-commutative", lambda a, b: spec.add(a, b) == spec.add(b, a), pairs_src)
    check("add-associative",
          lambda a, b, c: spec.add(spec.add(a, b), c) == spec.add(a, spec.add(b, c)),
          triples_src)
    check("add-unit", lambda a: spec.add(a, spec.zero()) == a, one)
    check("mul-associative",
          lambda a, b, c: spec.mul(spec.mul(a, b), c) == spec.mul(a, spec.mul(b, c)),
          triples_src)
    check("mul-unit",
          lambda a: spec.mul(a, spec.one()) == a and spec.mul(spec.one(), a) == a, one)
    check("distributes-left",
          lambda a, b, c: spec.mul(a, spec.add(b, c)) == spec.add(spec.mul(a, b), spec.mul(a, c)),
          triples_src)
    check("distributes-right",
          lambda a, b, c: spec.mul(spec.add(b, c), a) == spec.add(spec.mul(b, a), spec.mul(c, a)),
          triples_src)
    check("annihilation",
          lambda a: spec.mul(a, spec.zero()) == spec.zero()
          and spec.mul(spec.zero(), a) == spec.zero(), one)
    check("zero-least", lambda a: spec.leq(spec.zero(), a), one)

    related = [(a, b) for a, b in pairs_src if spec.leq(a, b)]
    mono_pairs = (list(iproduct(related, related)) if exhaustive
                  else list(zip(related, related[1:] + related[:1])))
    check("add-monotone",
          lambda ab, cd: spec.leq(spec.add(ab[0], cd[0]), spec.add(ab[1], cd[1])),
          mono_pairs)
    check("mul-monotone",
          lambda ab, cd: spec.leq(spec.mul(ab[0], cd[0]), spec.mul(ab[1], cd[1])),
          mono_pairs)
    return LawReport(results)


def _validate_table_shape(table: FiniteTable) -> LawResult:
    elems = set(table.elements)
    if len(elems) != len(table.elements):
        return LawResult("table-shape", False, ("duplicate elements",))
    for a, b in table.leq:
        if a not in elems or b not in elems:
            return LawResult("table-shape", False, ("leq off carrier", a, b))
    for op_name, op in (("sum", table.sum), ("mul", table.mul)):
        for a in table.elements:
            row = op.get(a)
            if row is None or set(row) != elems:
                return LawResult("table-shape", False, (f"{op_name} not total", a))
            for b, out in row.items():
                if out not in elems:
                    return LawResult("table-shape", False, (f"{op_name} leaves carrier", a, b))
    if table.zero not in elems or table.one not in elems:
        return LawResult("table-shape", False, ("constants off carrier",))
    return LawResult("table-shape", True)


def validate_hom(h: Hom, minimum_samples: int = 400) -> LawReport:
    """Check that a map is monotone and preserves 0, 1, sum and product."""
    src, tgt = h.source(), h.target()
    results = []
    try:
        ok0 = h.apply(src.zero()) == tgt.zero()
        results.append(LawResult("hom-zero", ok0, None if ok0 else (str(src.zero()),)))
        ok1 = h.apply(src.one()) == tgt.one()
        results.append(LawResult("hom-one", ok1, None if ok1 else (str(src.one()),)))
    except (PartialMap, CarrierMismatch) as exc:
        results.append(LawResult("hom-total", False, (str(exc),)))
        return LawReport(results)

    pool = _law_pool(src)
    exhaustive = src.elements() is not None
    if exhaustive:
        pairs = list(iproduct(pool, pool))
    else:
        pairs = [(a, b) for a, b, _ in _triples(pool, False, minimum_samples)]

    def check(law, fn):
        for a, b in pairs:
            try:
                if not fn(a, b):
                    results.append(LawResult(law, False, (str(a), str(b))))
                    return
            except (PartialMap, CarrierMismatch) as exc:
                results.append(LawResult(law, False, (str(exc),)))
                return
        results.append(LawResult(law, True))

    check("hom-add", lambda a, b: h.apply(src.add(a, b)) == tgt.add(h.apply(a), h.apply(b)))
    check("hom-mul", lambda a, b: h.apply(src.mul(a, b)) == tgt.mul(h.apply(a), h.apply(b)))
    check("hom-monotone",
          lambda a, b: not src.leq(a, b) or tgt.leq(h.apply(a), h.apply(b)))
    return LawReport(results)
