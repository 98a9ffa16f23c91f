"""Passage between one-operation and two-operation presentations.

On polynomials: polarize replaces x*y by the sum of a commutative product
and an anticommutative bracket; depolarize inverts it via half sums and half
differences.  The two maps are mutually inverse linear isomorphisms of the
free algebras, so T-ideal membership transfers exactly.

On table models: the derived bracket [a,b] = D(a).b - a.D(b) of a
commutative associative algebra with derivation, the pre-Lie product
a*b = D(a)b - aD(b) of a right-commutative (half-shuffle) algebra with
derivation, and the symmetrization-plus-derived-bracket construction that
lands in both compatibility varieties at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .models import (
    ModelError,
    TableAlgebra,
    check_axioms,
    leibniz_defects,
    sparse_add_scaled,
)
from .terms import (
    Apply,
    OperationSignature,
    Poly,
    Term,
    TermError,
    Var,
    apply_op,
    poly_of,
)
from .varieties import SIG_POLAR, SIG_POLAR_D0, SIG_STAR, SIG_STAR_D0, Variety, builtin

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class PolarizationMap:
    star: str = "star"
    dot: str = "mul"
    bracket: str = "br"


DEFAULT_MAP = PolarizationMap()


def _polar_sigs(pm: PolarizationMap, with_derivation: bool):
    if pm == DEFAULT_MAP:
        return (SIG_STAR, SIG_POLAR) if with_derivation else (SIG_STAR_D0, SIG_POLAR_D0)
    raise TermError("custom polarization maps need explicit signatures")


def polarize(p: Poly, pm: PolarizationMap = DEFAULT_MAP,
             sig_out: OperationSignature | None = None) -> Poly:
    """Substitute x*y -> x.y + [x,y] monomial by monomial and renormalize."""
    if sig_out is None:
        _, sig_out = _polar_sigs(pm, True)

    def walk(t: Term) -> Poly:
        if isinstance(t, Var):
            return poly_of(t)
        if t.op != pm.star:
            raise TermError(f"polarize expects only {pm.star!r} applications, found {t.op!r}")
        u, v = (walk(c) for c in t.children)
        return apply_op(sig_out, pm.dot, u, v) + apply_op(sig_out, pm.bracket, u, v)

    acc = Poly()
    for m in p.monomials:
        acc = acc + walk(m.term) * m.coeff
    return acc


def depolarize(p: Poly, pm: PolarizationMap = DEFAULT_MAP,
               sig_out: OperationSignature | None = None) -> Poly:
    """Substitute x.y -> (x*y + y*x)/2 and [x,y] -> (x*y - y*x)/2."""
    if sig_out is None:
        sig_out, _ = _polar_sigs(pm, True)

    def walk(t: Term) -> Poly:
        if isinstance(t, Var):
            return poly_of(t)
        u, v = (walk(c) for c in t.children)
        uv = apply_op(sig_out, pm.star, u, v)
        vu = apply_op(sig_out, pm.star, v, u)
        if t.op == pm.dot:
            return HALF * (uv + vu)
        if t.op == pm.bracket:
            return HALF * (uv - vu)
        raise TermError(f"depolarize expects only {pm.dot!r}/{pm.bracket!r} "
                        f"applications, found {t.op!r}")

    acc = Poly()
    for m in p.monomials:
        acc = acc + walk(m.term) * m.coeff
    return acc


# ---------------------------------------------------------------------------
# Model-level constructions


def depolarize_model(m: TableAlgebra, pm: PolarizationMap = DEFAULT_MAP) -> TableAlgebra:
    """Add the single-operation table star = dot + bracket."""
    dim = m.dim
    table = {}
    for i in range(dim):
        for j in range(dim):
            entry: dict = {}
            sparse_add_scaled(entry, m.product(pm.dot, i, j), 1)
            sparse_add_scaled(entry, m.product(pm.bracket, i, j), 1)
            if entry:
                table[(i, j)] = entry
    return m.copy_with(tables={**m.tables, pm.star: table}, certified=set(m.certified))


def polarize_model(m: TableAlgebra, pm: PolarizationMap = DEFAULT_MAP) -> TableAlgebra:
    """Split the single-operation table into half-sum and half-difference tables."""
    dim = m.dim
    dot, br = {}, {}
    for i in range(dim):
        for j in range(dim):
            s: dict = {}
            a: dict = {}
            sparse_add_scaled(s, m.product(pm.star, i, j), HALF)
            sparse_add_scaled(s, m.product(pm.star, j, i), HALF)
            sparse_add_scaled(a, m.product(pm.star, i, j), HALF)
            sparse_add_scaled(a, m.product(pm.star, j, i), -HALF)
            if s:
                dot[(i, j)] = s
            if a:
                br[(i, j)] = a
    return m.copy_with(tables={**m.tables, pm.dot: dot, pm.bracket: br},
                       certified=set(m.certified))


def derived_bracket(m: TableAlgebra) -> TableAlgebra:
    """Bracket [a,b] = D(a).b - a.D(b) on a commutative associative model.

    The input must certify as commutative associative with derivation; the
    output certifies for both the derivation-twisted and the transposed
    compatibility varieties."""
    ca = builtin("CommAssoc").with_derivation()
    if ca.name not in m.certified:
        report = check_axioms(m, ca)
        if not report.passed:
            raise ModelError("derived_bracket needs a commutative associative "
                             f"model with derivation: {report.failure.describe(m)}")
    rows = m.dmats["D"]
    table = {}
    for i in range(m.dim):
        for j in range(m.dim):
            entry: dict = {}
            sparse_add_scaled(entry, m.bilinear("mul", rows[i], {j: 1}), 1)
            sparse_add_scaled(entry, m.bilinear("mul", {i: 1}, rows[j]), -1)
            if entry:
                table[(i, j)] = entry
    out = m.copy_with(tables={**m.tables, "br": table},
                      certified=set(m.certified), name=m.name + "+br")
    for vname in ("GeneralizedPoisson", "TransposedPoisson"):
        report = check_axioms(out, builtin(vname))
        if not report.passed:
            raise AssertionError(f"derived bracket failed {vname} certification: "
                                 f"{report.failure.describe(out)}")
    return out


def _require_zinbiel_with_derivation(m: TableAlgebra) -> None:
    z = builtin("Zinbiel")
    if z.name not in m.certified:
        report = check_axioms(m, z)
        if not report.passed:
            raise ModelError(f"model is not a Zinbiel algebra: {report.failure.describe(m)}")
    if "D" not in m.dmats:
        raise ModelError("model carries no derivation D")
    defects = leibniz_defects(m, "zmul", "D")
    if defects:
        (i, j), defect = defects[0]
        raise ModelError(
            f"D is not a derivation of the product: defect at pair "
            f"({m.basis_labels[i]}, {m.basis_labels[j]}) = {defect} "
            f"({len(defects)} defective pairs in total)")


def zinbiel_star(m: TableAlgebra) -> TableAlgebra:
    """Pre-Lie product a*b = D(a)b - aD(b) on a Zinbiel model with derivation.

    The output certifies left-symmetric."""
    _require_zinbiel_with_derivation(m)
    rows = m.dmats["D"]
    table = {}
    for i in range(m.dim):
        for j in range(m.dim):
            entry: dict = {}
            sparse_add_scaled(entry, m.bilinear("zmul", rows[i], {j: 1}), 1)
            sparse_add_scaled(entry, m.bilinear("zmul", {i: 1}, rows[j]), -1)
            if entry:
                table[(i, j)] = entry
    out = m.copy_with(tables={**m.tables, "star": table},
                      certified=set(m.certified), name=m.name + "+star")
    report = check_axioms(out, builtin("LeftSymmetric"))
    if not report.passed:
        raise AssertionError(f"pre-Lie certification failed: {report.failure.describe(out)}")
    return out


def zinbiel_polarization(m: TableAlgebra) -> TableAlgebra:
    """Symmetrized product a.b = ab + ba with bracket [a,b] = D(a).b - a.D(b).

    The bracket coincides with the antisymmetrization a*b - b*a of the
    pre-Lie product, and the output certifies for both compatibility
    varieties at once."""
    _require_zinbiel_with_derivation(m)
    rows = m.dmats["D"]
    dot = {}
    for i in range(m.dim):
        for j in range(m.dim):
            entry: dict = {}
            sparse_add_scaled(entry, m.product("zmul", i, j), 1)
            sparse_add_scaled(entry, m.product("zmul", j, i), 1)
            if entry:
                dot[(i, j)] = entry
    inter = m.copy_with(tables={**m.tables, "mul": dot}, certified=set())
    br = {}
    for i in range(m.dim):
        for j in range(m.dim):
            entry = {}
            sparse_add_scaled(entry, inter.bilinear("mul", rows[i], {j: 1}), 1)
            sparse_add_scaled(entry, inter.bilinear("mul", {i: 1}, rows[j]), -1)
            if entry:
                br[(i, j)] = entry
    out = m.copy_with(tables={**m.tables, "mul": dot, "br": br},
                      certified=set(), name=m.name + "+polar")
    for vname in ("GeneralizedPoisson", "TransposedPoisson"):
        report = check_axioms(out, builtin(vname))
        if not report.passed:
            raise AssertionError(f"symmetrization failed {vname} certification: "
                                 f"{report.failure.describe(out)}")
    return out
