"""Normal forms for free differential nonassociative terms.

Terms live over a declared operation signature: binary operations carrying an
optional symmetry flag (commutative or anticommutative) plus at most one
derivation, a unary map that expands through every operation by the Leibniz
rule.  Polynomials are exact-rational linear combinations of normal-form
terms; all arithmetic uses ``fractions.Fraction`` so identities verify to a
literal zero.

Normal form means: derivations appear only as a power count on variables,
children of a commutative operation are sorted by the canonical term order,
children of an anticommutative operation are sorted with the sign recorded
(equal children collapse the term to zero).  Associativity and Jacobi are
deliberately *not* rewriting rules here; they are ordinary axioms handled by
the consequence engine, so the free algebra stays free.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

SYMMETRIC = "symmetric"
ANTISYMMETRIC = "antisymmetric"
PLAIN = "none"
_SYMMETRIES = (SYMMETRIC, ANTISYMMETRIC, PLAIN)

DEFAULT_BASIS_CAP = 100_000

Rational = Union[int, Fraction]


class TermError(ValueError):
    """Malformed term, signature, substitution, or vectorization input."""


class BasisCapExceeded(RuntimeError):
    """Slice enumeration exceeded the configured term cap."""


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class Operation:
    name: str
    arity: int
    symmetry: str = PLAIN


@dataclass(frozen=True)
class OperationSignature:
    """The operation alphabet: declared ops plus optional derivation names."""

    ops: tuple[Operation, ...]
    derivations: tuple[str, ...] = ()

    def __post_init__(self):
        names = [o.name for o in self.ops] + list(self.derivations)
        if len(set(names)) != len(names):
            raise TermError(f"duplicate names in signature: {sorted(names)}")
        for o in self.ops:
            if o.arity not in (1, 2):
                raise TermError(f"operation {o.name}: arity must be 1 or 2")
            if o.symmetry not in _SYMMETRIES:
                raise TermError(f"operation {o.name}: unknown symmetry {o.symmetry!r}")
            if o.arity == 1 and o.symmetry != PLAIN:
                raise TermError(f"operation {o.name}: unary ops carry no symmetry flag")
        if len(self.derivations) > 1:
            # Var.dpow is a single counter, which cannot represent words in
            # two or more distinct non-commuting derivations.
            raise TermError("at most one derivation per signature is supported")

    def op(self, name: str) -> Operation:
        for o in self.ops:
            if o.name == name:
                return o
        raise TermError(f"unknown operation {name!r}")

    def has_op(self, name: str) -> bool:
        return any(o.name == name for o in self.ops)

    def is_derivation(self, name: str) -> bool:
        return name in self.derivations

    @property
    def derivation(self) -> str | None:
        return self.derivations[0] if self.derivations else None

    def binary_ops(self) -> tuple[Operation, ...]:
        return tuple(o for o in self.ops if o.arity == 2)

    def with_derivation(self, name: str = "D") -> "OperationSignature":
        if name in self.derivations:
            return self
        return OperationSignature(self.ops, self.derivations + (name,))

    def without_derivations(self) -> "OperationSignature":
        return OperationSignature(self.ops, ())


def signature(*ops, derivations: Sequence[str] = ()) -> OperationSignature:
    """Build a signature from ``(name, arity[, symmetry])`` tuples."""
    parsed = []
    for spec in ops:
        if isinstance(spec, Operation):
            parsed.append(spec)
        else:
            name, arity = spec[0], spec[1]
            sym = spec[2] if len(spec) > 2 else PLAIN
            parsed.append(Operation(name, arity, sym))
    return OperationSignature(tuple(parsed), tuple(derivations))


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    """A variable leaf; ``dpow`` counts derivation applications."""

    index: int
    dpow: int = 0


@dataclass(frozen=True)
class Apply:
    op: str
    children: tuple["Term", ...]


Term = Union[Var, Apply]

# Variable index 0 is reserved for the hole of a one-hole context.
HOLE = Var(0, 0)

_KEY_CACHE: dict[Term, tuple] = {}


def term_key(t: Term) -> tuple:
    """Total order key: recursive lexicographic on
    (node kind, variable index, dpow, op name, children)."""
    k = _KEY_CACHE.get(t)
    if k is None:
        if isinstance(t, Var):
            k = (0, t.index, t.dpow, "", ())
        else:
            k = (1, 0, 0, t.op, tuple(term_key(c) for c in t.children))
        _KEY_CACHE[t] = k
    return k


def term_degree(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return sum(term_degree(c) for c in t.children)


def term_weight(t: Term) -> int:
    if isinstance(t, Var):
        return t.dpow
    return sum(term_weight(c) for c in t.children)


def term_variables(t: Term) -> list[int]:
    """Variable indices in leaf order, with repetitions."""
    if isinstance(t, Var):
        return [t.index]
    out: list[int] = []
    for c in t.children:
        out.extend(term_variables(c))
    return out


def is_multilinear_term(t: Term, n: int | None = None) -> bool:
    vs = term_variables(t)
    if len(set(vs)) != len(vs):
        return False
    return n is None or sorted(vs) == list(range(1, n + 1))


# ---------------------------------------------------------------------------
# Polynomials


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    term: Term


@dataclass(frozen=True)
class Poly:
    """A canonically ordered rational combination of normal-form terms."""

    monomials: tuple[Monomial, ...] = ()

    def is_zero(self) -> bool:
        return not self.monomials

    def __add__(self, other: "Poly") -> "Poly":
        return _collect(itertools.chain(self.monomials, other.monomials))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly(tuple(Monomial(-m.coeff, m.term) for m in self.monomials))

    def __mul__(self, scalar: Rational) -> "Poly":
        c = Fraction(scalar)
        if c == 0:
            return ZERO
        return Poly(tuple(Monomial(m.coeff * c, m.term) for m in self.monomials))

    __rmul__ = __mul__

    def __truediv__(self, scalar: Rational) -> "Poly":
        return self * (Fraction(1) / Fraction(scalar))

    def coeff(self, t: Term) -> Fraction:
        for m in self.monomials:
            if m.term == t:
                return m.coeff
        return Fraction(0)


ZERO = Poly()


def _collect(monos: Iterable[Monomial]) -> Poly:
    acc: dict[Term, Fraction] = {}
    for m in monos:
        acc[m.term] = acc.get(m.term, Fraction(0)) + m.coeff
    kept = [Monomial(c, t) for t, c in acc.items() if c != 0]
    kept.sort(key=lambda m: term_key(m.term))
    return Poly(tuple(kept))


def poly_of(t: Term, coeff: Rational = 1) -> Poly:
    c = Fraction(coeff)
    return Poly((Monomial(c, t),)) if c != 0 else ZERO


def var(index: int, dpow: int = 0) -> Poly:
    return poly_of(Var(index, dpow))


def poly_variables(p: Poly) -> list[int]:
    vs: set[int] = set()
    for m in p.monomials:
        vs.update(term_variables(m.term))
    return sorted(vs)


def poly_degree(p: Poly) -> int:
    """Common degree of all monomials; raises if mixed."""
    degs = {term_degree(m.term) for m in p.monomials}
    if not degs:
        return 0
    if len(degs) != 1:
        raise TermError(f"polynomial is not homogeneous: degrees {sorted(degs)}")
    return degs.pop()


def poly_max_weight(p: Poly) -> int:
    return max((term_weight(m.term) for m in p.monomials), default=0)


def poly_min_weight(p: Poly) -> int:
    return min((term_weight(m.term) for m in p.monomials), default=0)


def is_multilinear(p: Poly, n: int | None = None) -> bool:
    if p.is_zero():
        return True
    if n is None:
        vs = poly_variables(p)
        n = len(vs)
        if vs != list(range(1, n + 1)):
            return False
    return all(is_multilinear_term(m.term, n) for m in p.monomials)


def delete_weighted_monomials(p: Poly) -> Poly:
    """Drop every monomial that mentions the derivation (weight > 0)."""
    return Poly(tuple(m for m in p.monomials if term_weight(m.term) == 0))


# ---------------------------------------------------------------------------
# Normalization


def _combine(sig: OperationSignature, op: Operation, lt: Term, rt: Term):
    """Order the children of a binary node per the symmetry flag.

    Returns (sign, term) with term=None when the product is zero."""
    if op.symmetry == PLAIN:
        return 1, Apply(op.name, (lt, rt))
    kl, kr = term_key(lt), term_key(rt)
    if op.symmetry == SYMMETRIC:
        if kl <= kr:
            return 1, Apply(op.name, (lt, rt))
        return 1, Apply(op.name, (rt, lt))
    # antisymmetric
    if kl == kr:
        return 0, None
    if kl < kr:
        return 1, Apply(op.name, (lt, rt))
    return -1, Apply(op.name, (rt, lt))


def _derive_term(sig: OperationSignature, t: Term) -> Poly:
    """One application of the derivation to a normal-form term (Leibniz)."""
    if isinstance(t, Var):
        return poly_of(Var(t.index, t.dpow + 1))
    parts = ZERO
    for i, c in enumerate(t.children):
        dc = _derive_term(sig, c)
        rest = list(t.children)
        for m in dc.monomials:
            rest_i = tuple(rest[:i]) + (m.term,) + tuple(rest[i + 1:])
            if len(rest_i) == 1:
                parts = parts + poly_of(Apply(t.op, rest_i), m.coeff)
            else:
                op = sig.op(t.op)
                sgn, nt = _combine(sig, op, rest_i[0], rest_i[1])
                if nt is not None:
                    parts = parts + poly_of(nt, m.coeff * sgn)
    return parts


def d_apply(p: Poly, k: int, sig: OperationSignature) -> Poly:
    """Apply the signature's derivation ``k`` times with full Leibniz expansion."""
    if k < 0:
        raise TermError("derivation power must be nonnegative")
    if k and sig.derivation is None:
        raise TermError("signature declares no derivation")
    for _ in range(k):
        acc = ZERO
        for m in p.monomials:
            acc = acc + _derive_term(sig, m.term) * m.coeff
        p = acc
    return p


def apply_op(sig: OperationSignature, name: str, *args: Poly) -> Poly:
    """Apply a named operation to polynomials, multilinearly, renormalizing."""
    if sig.is_derivation(name):
        if len(args) != 1:
            raise TermError(f"derivation {name} is unary")
        return d_apply(args[0], 1, sig)
    op = sig.op(name)
    if op.arity != len(args):
        raise TermError(f"operation {name} expects {op.arity} arguments, got {len(args)}")
    if op.arity == 1:
        (p,) = args
        return _collect(Monomial(m.coeff, Apply(name, (m.term,))) for m in p.monomials)
    p, q = args
    out: list[Monomial] = []
    for mp in p.monomials:
        for mq in q.monomials:
            sgn, t = _combine(sig, op, mp.term, mq.term)
            if t is not None:
                out.append(Monomial(mp.coeff * mq.coeff * sgn, t))
    return _collect(out)


def normalize(t: Term, sig: OperationSignature) -> Poly:
    """Canonical polynomial equal to the raw term tree ``t``.

    Raw trees may contain derivation nodes ``Apply(D, (u,))``; these are
    expanded to leaf powers.  Idempotent on normal forms."""
    if isinstance(t, Var):
        if t.index < 0:
            raise TermError("variable indices are 1-based (0 is the context hole)")
        return poly_of(t)
    if sig.is_derivation(t.op):
        if len(t.children) != 1:
            raise TermError(f"derivation {t.op} is unary")
        return d_apply(normalize(t.children[0], sig), 1, sig)
    return apply_op(sig, t.op, *(normalize(c, sig) for c in t.children))


def substitute(p: Poly, sigma: Mapping[int, Union[Poly, Term]], sig: OperationSignature) -> Poly:
    """Multilinear substitution of polynomials for variables, renormalized.

    Variables missing from ``sigma`` are left fixed.  A variable with a
    derivation power receives the derivation of its image."""
    images: dict[int, Poly] = {}
    for k, v in sigma.items():
        images[k] = v if isinstance(v, Poly) else poly_of(v)

    def subst_term(t: Term) -> Poly:
        if isinstance(t, Var):
            img = images.get(t.index)
            if img is None:
                return poly_of(t)
            return d_apply(img, t.dpow, sig)
        return apply_op(sig, t.op, *(subst_term(c) for c in t.children))

    acc = ZERO
    for m in p.monomials:
        acc = acc + subst_term(m.term) * m.coeff
    return acc


def rename_variables(p: Poly, mapping: Mapping[int, int], sig: OperationSignature) -> Poly:
    return substitute(p, {k: var(v) for k, v in mapping.items()}, sig)


def embed(context: Term, p: Poly, sig: OperationSignature) -> Poly:
    """Plug ``p`` into the hole (variable index 0) of a one-hole context."""
    return substitute(poly_of(context), {0: p}, sig)


# ---------------------------------------------------------------------------
# Multilinear slice enumeration


def multilinear_terms(variables: Sequence[int], max_weight: int,
                      sig: OperationSignature, cap: int = DEFAULT_BASIS_CAP,
                      frozen: Sequence[int] = ()) -> list[Term]:
    """All normal-form multilinear terms on exactly the given variables with
    total derivation weight <= max_weight.  ``frozen`` variables never carry
    derivation powers (used for context holes)."""
    for o in sig.ops:
        if o.arity == 1 and not sig.is_derivation(o.name):
            raise TermError("slice enumeration requires a binary signature "
                            f"(unary operation {o.name} gives an infinite slice)")
    if sig.derivation is None:
        max_weight = 0

    skeletons = _skeletons(tuple(sorted(variables)), sig, cap)
    out: list[Term] = []
    for sk in skeletons:
        leaves = [v for v in term_variables(sk) if v not in frozen]
        for weights in _weight_assignments(len(leaves), max_weight):
            decoration = dict(zip(leaves, weights))
            out.append(_decorate(sk, decoration))
            if len(out) > cap:
                raise BasisCapExceeded(f"more than {cap} slice terms")
    out.sort(key=term_key)
    return out


def _skeletons(variables: tuple[int, ...], sig: OperationSignature, cap: int) -> list[Term]:
    if len(variables) == 1:
        return [Var(variables[0], 0)]
    found: set[Term] = set()
    for op in sig.binary_ops():
        for r in range(1, len(variables)):
            for left in itertools.combinations(variables, r):
                right = tuple(v for v in variables if v not in left)
                for lt in _skeletons(left, sig, cap):
                    for rt in _skeletons(right, sig, cap):
                        sgn, t = _combine(sig, op, lt, rt)
                        if t is not None:
                            found.add(t)
                            if len(found) > cap:
                                raise BasisCapExceeded(f"more than {cap} slice terms")
    return sorted(found, key=term_key)


def _weight_assignments(k: int, total: int):
    """All tuples of k nonnegative ints with sum <= total."""
    if k == 0:
        yield ()
        return
    for head in range(total + 1):
        for rest in _weight_assignments(k - 1, total - head):
            yield (head,) + rest


def _decorate(t: Term, dpows: Mapping[int, int]) -> Term:
    # Decoration never reorders siblings: sibling subtrees carry disjoint
    # variable sets, so their keys diverge before any dpow component.
    if isinstance(t, Var):
        return Var(t.index, dpows.get(t.index, 0))
    return Apply(t.op, tuple(_decorate(c, dpows) for c in t.children))


@dataclass(frozen=True)
class SliceBasis:
    """Indexed basis of the multilinear degree-n, weight<=W component."""

    n: int
    W: int
    sig: OperationSignature
    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def index(self, t: Term) -> int:
        idx = self._index.get(t)  # type: ignore[attr-defined]
        if idx is None:
            raise TermError(f"term outside basis (degree/weight mismatch): {t}")
        return idx


def enumerate_basis(n: int, W: int, sig: OperationSignature,
                    cap: int = DEFAULT_BASIS_CAP) -> SliceBasis:
    """Complete duplicate-free basis of multilinear terms in x1..xn, total
    derivation weight <= W."""
    if n < 1:
        raise TermError("degree must be >= 1")
    if W < 0:
        raise TermError("weight bound must be >= 0")
    terms = multilinear_terms(range(1, n + 1), W, sig, cap=cap)
    return SliceBasis(n, W, sig, tuple(terms))


def to_vector(p: Poly, basis: SliceBasis) -> tuple[Fraction, ...]:
    vec = [Fraction(0)] * len(basis)
    for m in p.monomials:
        vec[basis.index(m.term)] = m.coeff
    return tuple(vec)


def from_vector(vec: Sequence[Rational], basis: SliceBasis) -> Poly:
    if len(vec) != len(basis):
        raise TermError("vector length does not match basis size")
    return _collect(Monomial(Fraction(c), t) for c, t in zip(vec, basis.terms) if c != 0)
