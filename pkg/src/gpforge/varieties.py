"""Variety definitions: operation signatures paired with axiom polynomials.

Each axiom is stored as a single canonical polynomial understood as "= 0"
(displays of the form lhs = rhs become lhs - rhs).  Commutativity and
anticommutativity live in the signature's symmetry flags rather than in
axioms, which halves slice sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .terms import (
    ANTISYMMETRIC,
    PLAIN,
    SYMMETRIC,
    OperationSignature,
    Poly,
    TermError,
    apply_op,
    delete_weighted_monomials,
    is_multilinear,
    poly_variables,
    signature,
    substitute,
    var,
)

# Shared operation alphabets.  ``mul`` is the commutative product, ``br`` the
# bracket, ``star`` the single asymmetric operation, ``zmul`` the (plain)
# product of right-commutative algebras, ``D`` the derivation.
SIG_POLAR = signature(("mul", 2, SYMMETRIC), ("br", 2, ANTISYMMETRIC), derivations=("D",))
SIG_POLAR_D0 = signature(("mul", 2, SYMMETRIC), ("br", 2, ANTISYMMETRIC))
SIG_STAR = signature(("star", 2, PLAIN), derivations=("D",))
SIG_STAR_D0 = signature(("star", 2, PLAIN))
SIG_MUL = signature(("mul", 2, SYMMETRIC))
SIG_BR = signature(("br", 2, ANTISYMMETRIC))
SIG_ZINBIEL = signature(("zmul", 2, PLAIN))


@dataclass(frozen=True)
class Variety:
    """A named signature plus axiom polynomials (each understood as = 0)."""

    name: str
    sig: OperationSignature
    axioms: tuple[tuple[str, Poly], ...]

    def __post_init__(self):
        seen = set()
        for ax_name, p in self.axioms:
            if ax_name in seen:
                raise TermError(f"duplicate axiom name {ax_name!r}")
            seen.add(ax_name)
            if not is_multilinear(p):
                raise TermError(f"axiom {ax_name!r} is not multilinear; "
                                "run multilinearize first")

    def axiom(self, name: str) -> Poly:
        for ax_name, p in self.axioms:
            if ax_name == name:
                return p
        raise TermError(f"variety {self.name!r} has no axiom {name!r}")

    def axiom_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.axioms)

    def with_axioms(self, extra: Iterable[tuple[str, Poly]], name: str | None = None) -> "Variety":
        return Variety(name or self.name, self.sig, self.axioms + tuple(extra))

    def with_derivation(self, dname: str = "D") -> "Variety":
        """Same axioms over the signature extended by a derivation."""
        if self.sig.derivation is not None:
            return self
        return Variety(f"{self.name}+der", self.sig.with_derivation(dname), self.axioms)


def merge(name: str, *parts: Variety) -> Variety:
    """Union of axiom systems over a shared signature."""
    sig = parts[0].sig
    axioms: list[tuple[str, Poly]] = []
    seen: set[str] = set()
    for part in parts:
        for ax_name, p in part.axioms:
            if ax_name not in seen:
                seen.add(ax_name)
                axioms.append((ax_name, p))
    return Variety(name, sig, tuple(axioms))


# ---------------------------------------------------------------------------
# Built-in axiom polynomials


def _ops(sig: OperationSignature):
    def mk(name: str) -> Callable[..., Poly]:
        return lambda *args: apply_op(sig, name, *args)
    return mk


x1, x2, x3 = var(1), var(2), var(3)
HALF = Fraction(1, 2)


def _assoc(sig: OperationSignature, opname: str) -> Poly:
    o = _ops(sig)(opname)
    return o(o(x1, x2), x3) - o(x1, o(x2, x3))


def _jacobi(sig: OperationSignature) -> Poly:
    br = _ops(sig)("br")
    return br(br(x1, x2), x3) + br(br(x2, x3), x1) + br(br(x3, x1), x2)


def _leibniz(sig: OperationSignature) -> Poly:
    mul, br = _ops(sig)("mul"), _ops(sig)("br")
    return br(mul(x1, x2), x3) - mul(x1, br(x2, x3)) - mul(br(x1, x3), x2)


def _leibniz_d(sig: OperationSignature) -> Poly:
    mul, d = _ops(sig)("mul"), _ops(sig)("D")
    return _leibniz(sig) - mul(mul(x1, x2), d(x3))


def _transposed_leibniz(sig: OperationSignature) -> Poly:
    mul, br = _ops(sig)("mul"), _ops(sig)("br")
    return 2 * mul(x1, br(x2, x3)) - br(mul(x1, x2), x3) - br(x2, mul(x1, x3))


def _intersect1(sig: OperationSignature) -> Poly:
    mul, br, d = _ops(sig)("mul"), _ops(sig)("br"), _ops(sig)("D")
    return mul(x1, br(x2, x3)) - mul(mul(x1, x3), d(x2)) + mul(mul(x1, x2), d(x3))


def _intersect2(sig: OperationSignature) -> Poly:
    mul, br, d = _ops(sig)("mul"), _ops(sig)("br"), _ops(sig)("D")
    return (br(mul(x1, x2), x3) - mul(mul(x2, x3), d(x1))
            - mul(mul(x1, x3), d(x2)) + mul(mul(x1, x2), d(x3)))


def _zinbiel(sig: OperationSignature) -> Poly:
    z = _ops(sig)("zmul")
    return z(z(x1, x2), x3) + z(z(x2, x1), x3) - z(x1, z(x2, x3))


def _left_symmetric(sig: OperationSignature) -> Poly:
    s = _ops(sig)("star")
    return (s(s(x1, x2), x3) - s(x1, s(x2, x3))
            - s(s(x2, x1), x3) + s(x2, s(x1, x3)))


def star_dot(sig: OperationSignature, p: Poly, q: Poly) -> Poly:
    """Symmetrized star product: the commutative multiplication hidden in a
    one-operation algebra."""
    s = _ops(sig)("star")
    return HALF * (s(p, q) + s(q, p))


def _gp_star(sig: OperationSignature) -> Poly:
    """Single-operation axiom whose polarization yields the derivation-twisted
    Leibniz system (associativity, Jacobi, compatibility)."""
    s, d = _ops(sig)("star"), _ops(sig)("D")
    dot = lambda p, q: star_dot(sig, p, q)
    associator = s(s(x1, x2), x3) - s(x1, s(x2, x3))
    return (-3 * associator
            + s(s(x1, x3), x2) + s(s(x2, x3), x1)
            - s(s(x2, x1), x3) - s(s(x3, x1), x2)
            + 4 * dot(dot(x1, x2), d(x3))
            + 2 * dot(d(x1), dot(x2, x3)))


def _gptp_star1(sig: OperationSignature) -> Poly:
    s, d = _ops(sig)("star"), _ops(sig)("D")
    dot = lambda p, q: star_dot(sig, p, q)
    return (s(x1, s(x2, x3)) - s(s(x3, x2), x1)
            - 2 * dot(dot(x2, x3), d(x1))
            + 4 * dot(dot(x1, x2), d(x3)))


def _gptp_star2(sig: OperationSignature) -> Poly:
    s, d = _ops(sig)("star"), _ops(sig)("D")
    dot = lambda p, q: star_dot(sig, p, q)
    return (s(s(x1, x2), x3) - s(x1, s(x2, x3))
            - HALF * s(s(x1, x3), x2) + HALF * s(s(x3, x1), x2)
            - 2 * dot(dot(x1, x2), d(x3)))


def _reverse_assoc(sig: OperationSignature) -> Poly:
    s = _ops(sig)("star")
    return s(x1, s(x2, x3)) - s(s(x3, x2), x1)


def _dot_bracket_zero(sig: OperationSignature) -> Poly:
    mul, br = _ops(sig)("mul"), _ops(sig)("br")
    return mul(x1, br(x2, x3))


def _bracket_dot_zero(sig: OperationSignature) -> Poly:
    mul, br = _ops(sig)("mul"), _ops(sig)("br")
    return br(mul(x1, x2), x3)


def _make_builtins() -> dict[str, Variety]:
    out: dict[str, Variety] = {}

    out["CommAssoc"] = Variety("CommAssoc", SIG_MUL, (("assoc", _assoc(SIG_MUL, "mul")),))
    out["Lie"] = Variety("Lie", SIG_BR, (("jacobi", _jacobi(SIG_BR)),))

    s = SIG_POLAR_D0
    out["Poisson"] = Variety("Poisson", s, (
        ("assoc", _assoc(s, "mul")),
        ("jacobi", _jacobi(s)),
        ("leibniz", _leibniz(s)),
    ))
    out["TransposedPoisson"] = Variety("TransposedPoisson", s, (
        ("assoc", _assoc(s, "mul")),
        ("jacobi", _jacobi(s)),
        ("transposed_leibniz", _transposed_leibniz(s)),
    ))
    out["Poisson-and-TP"] = Variety("Poisson-and-TP", s, (
        ("assoc", _assoc(s, "mul")),
        ("jacobi", _jacobi(s)),
        ("dot_bracket_zero", _dot_bracket_zero(s)),
        ("bracket_dot_zero", _bracket_dot_zero(s)),
    ))

    sd = SIG_POLAR
    out["GeneralizedPoisson"] = Variety("GeneralizedPoisson", sd, (
        ("assoc", _assoc(sd, "mul")),
        ("jacobi", _jacobi(sd)),
        ("leibniz_d", _leibniz_d(sd)),
    ))
    out["GP-and-TP"] = Variety("GP-and-TP", sd, (
        ("assoc", _assoc(sd, "mul")),
        ("jacobi", _jacobi(sd)),
        ("intersect1", _intersect1(sd)),
        ("intersect2", _intersect2(sd)),
    ))

    out["Zinbiel"] = Variety("Zinbiel", SIG_ZINBIEL, (("zinbiel", _zinbiel(SIG_ZINBIEL)),))
    out["LeftSymmetric"] = Variety("LeftSymmetric", SIG_STAR_D0,
                                   (("left_symmetric", _left_symmetric(SIG_STAR_D0)),))
    out["ReverseAssociative"] = Variety("ReverseAssociative", SIG_STAR_D0,
                                        (("reverse_assoc", _reverse_assoc(SIG_STAR_D0)),))

    out["GPStar"] = Variety("GPStar", SIG_STAR, (("gp_star", _gp_star(SIG_STAR)),))
    out["GPTPStar"] = Variety("GPTPStar", SIG_STAR, (
        ("gptp_star1", _gptp_star1(SIG_STAR)),
        ("gptp_star2", _gptp_star2(SIG_STAR)),
    ))
    return out


_BUILTINS = _make_builtins()

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin(name: str) -> Variety:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise TermError(f"unknown builtin variety {name!r}; "
                        f"known: {', '.join(BUILTIN_NAMES)}") from None


def delete_derivation(v: Variety, name: str | None = None) -> Variety:
    """The derivation-free degeneration: drop every monomial mentioning the
    derivation and remove it from the signature.  Axioms that vanish entirely
    are dropped."""
    axioms = []
    for ax_name, p in v.axioms:
        q = delete_weighted_monomials(p)
        if not q.is_zero():
            axioms.append((ax_name, q))
    return Variety(name or f"{v.name}@D=0", v.sig.without_derivations(), tuple(axioms))


# ---------------------------------------------------------------------------
# Multilinearization (characteristic-0 polarization of repeated variables)


def multilinearize(p: Poly, sig: OperationSignature) -> list[Poly]:
    """Full multilinearization of a polynomial with repeated variables.

    The result is one multilinear polynomial per multidegree component of
    ``p``, each renumbered to variables 1..n.  Already-multilinear input
    returns ``[p]`` (up to renumbering)."""
    if p.is_zero():
        return []

    components: dict[tuple[tuple[int, int], ...], Poly] = {}
    for m in p.monomials:
        counts: dict[int, int] = {}
        for v in _term_vars(m.term):
            counts[v] = counts.get(v, 0) + 1
        key = tuple(sorted(counts.items()))
        piece = Poly((m,))
        components[key] = components.get(key, Poly()) + piece

    out: list[Poly] = []
    for key in sorted(components):
        q = components[key]
        counts = dict(key)
        next_fresh = max(counts) + 1
        for v in sorted(counts):
            mult = counts[v]
            if mult == 1:
                continue
            fresh = list(range(next_fresh, next_fresh + mult))
            next_fresh += mult
            expansion = substitute(q, {v: sum((var(f) for f in fresh), Poly())}, sig)
            q = _extract_linear(expansion, fresh)
        out.append(_renumber(q, sig))
    return out


def _term_vars(t) -> list[int]:
    from .terms import term_variables
    return term_variables(t)


def _extract_linear(p: Poly, variables: list[int]) -> Poly:
    wanted = set(variables)
    kept = []
    for m in p.monomials:
        vs = _term_vars(m.term)
        if all(vs.count(v) == 1 for v in wanted):
            kept.append(m)
    return Poly(tuple(kept))


def _renumber(p: Poly, sig: OperationSignature) -> Poly:
    vs = poly_variables(p)
    mapping = {old: new for new, old in enumerate(vs, start=1)}
    if all(k == v for k, v in mapping.items()):
        return p
    return substitute(p, {k: var(v) for k, v in mapping.items()}, sig)
