"""Bundled proof certificates relating the built-in varieties.

Each entry packages a target polynomial, the axiom system it is proved
against, and the explicit rational combination of permuted axiom instances
that equals it.  All of them verify with a residual of literally zero; the
test suite and the reproduction script replay them through
``engine.verify_certificate``.
"""

from __future__ import annotations

from fractions import Fraction

from .engine import Certificate, CertificatePart, InstanceOptions, derive
from .terms import Poly, Var, apply_op, var
from .transforms import depolarize, polarize
from .varieties import SIG_POLAR, SIG_POLAR_D0, Variety, builtin

_X, _Y, _Z = 1, 2, 3


def _perm_part(coeff, axiom: str, images: tuple[int, int, int]) -> CertificatePart:
    sigma = tuple((slot, Var(image, 0)) for slot, image in enumerate(images, start=1))
    return CertificatePart(Fraction(coeff), axiom, sigma)


def _named(target: Poly, variety: Variety, parts) -> tuple[str, Certificate, Variety]:
    return Certificate(target, tuple(parts)), variety


def star_jacobi() -> Poly:
    """The double-bracket cycle rewritten in the single operation."""
    return depolarize(builtin("GeneralizedPoisson").axiom("jacobi"))


def star_associator() -> Poly:
    """The dot associator rewritten in the single operation."""
    return depolarize(builtin("GeneralizedPoisson").axiom("assoc"))


def star_compat() -> Poly:
    """The derivation-twisted compatibility polynomial in the single operation."""
    return depolarize(builtin("GeneralizedPoisson").axiom("leibniz_d"))


def cert_jacobi_from_single_op() -> tuple[Certificate, Variety]:
    """Twelve times the Jacobi cycle as a signed sum over all six
    permutations of the one-operation axiom."""
    signs = {(_X, _Y, _Z): -1, (_X, _Z, _Y): 1, (_Y, _X, _Z): 1,
             (_Y, _Z, _X): -1, (_Z, _X, _Y): -1, (_Z, _Y, _X): 1}
    parts = [_perm_part(c, "gp_star", p) for p, c in signs.items()]
    return _named(12 * star_jacobi(), builtin("GPStar"), parts)


def cert_associator_from_single_op() -> tuple[Certificate, Variety]:
    signs = {(_X, _Y, _Z): -1, (_X, _Z, _Y): -1, (_Z, _X, _Y): 1, (_Z, _Y, _X): 1}
    parts = [_perm_part(c, "gp_star", p) for p, c in signs.items()]
    return _named(12 * star_associator(), builtin("GPStar"), parts)


def cert_compat_from_single_op() -> tuple[Certificate, Variety]:
    signs = {(_X, _Y, _Z): -1, (_X, _Z, _Y): 1, (_Y, _X, _Z): -1,
             (_Y, _Z, _X): 1, (_Z, _X, _Y): -1, (_Z, _Y, _X): -1}
    parts = [_perm_part(c, "gp_star", p) for p, c in signs.items()]
    return _named(12 * star_compat(), builtin("GPStar"), parts)


def single_op_reduction_target() -> Poly:
    """Polarized one-operation axiom plus 4.compat(x,y,z) + 2.compat(y,z,x);
    this combination lies in the span of associativity and Jacobi instances."""
    from .terms import substitute
    gp = builtin("GeneralizedPoisson")
    compat = gp.axiom("leibniz_d")
    rot = substitute(compat, {1: var(2), 2: var(3), 3: var(1)}, SIG_POLAR)
    return polarize(builtin("GPStar").axiom("gp_star")) + 4 * compat + 2 * rot


def assoc_jacobi_background() -> Variety:
    gp = builtin("GeneralizedPoisson")
    return Variety("assoc+jacobi", SIG_POLAR,
                   (("assoc", gp.axiom("assoc")), ("jacobi", gp.axiom("jacobi"))))


def cert_single_op_reduction(options: InstanceOptions = InstanceOptions()) -> tuple[Certificate, Variety]:
    """Discovered (not hand-copied) certificate for the reduction modulo
    associativity and Jacobi instances at degree 3, weight 1."""
    v = assoc_jacobi_background()
    result = derive(single_op_reduction_target(), v, 3, 1, options)
    if isinstance(result, Certificate):
        return result, v
    raise AssertionError("reduction target unexpectedly outside the slice")


def cert_assoc_from_pair() -> tuple[Certificate, Variety]:
    """Twelve times the dot associator from the two coupled one-operation
    axioms."""
    parts = [
        _perm_part(5, "gptp_star1", (_X, _Y, _Z)),
        _perm_part(1, "gptp_star1", (_X, _Z, _Y)),
        _perm_part(-1, "gptp_star1", (_Z, _X, _Y)),
        _perm_part(3, "gptp_star1", (_Z, _Y, _X)),
        _perm_part(8, "gptp_star2", (_X, _Y, _Z)),
        _perm_part(4, "gptp_star2", (_X, _Z, _Y)),
        _perm_part(-4, "gptp_star2", (_Z, _X, _Y)),
    ]
    return _named(12 * star_associator(), builtin("GPTPStar"), parts)


def pair_with_associator() -> Variety:
    """The coupled axioms extended by the dot associator as a named axiom
    (it is itself a consequence, certified separately)."""
    return builtin("GPTPStar").with_axioms(
        (("star_assoc", star_associator()),), name="GPTPStar+assoc")


def cert_jacobi_from_pair() -> tuple[Certificate, Variety]:
    """Four times the Jacobi cycle from the coupled axioms plus the
    associator."""
    parts = [
        _perm_part(-4, "star_assoc", (_Z, _X, _Y)),
        _perm_part(-1, "gptp_star1", (_X, _Y, _Z)),
        _perm_part(1, "gptp_star1", (_X, _Z, _Y)),
        _perm_part(-2, "gptp_star2", (_Y, _X, _Z)),
        _perm_part(2, "gptp_star2", (_Z, _X, _Y)),
    ]
    return _named(4 * star_jacobi(), pair_with_associator(), parts)


def intersection_expansion_target() -> Poly:
    """[x,y].z + [x.y,z] - x.[y,z] - [x,y.z] - [x,z].y - 2(x.y).D(z)."""
    s = SIG_POLAR
    mul = lambda a, b: apply_op(s, "mul", a, b)
    br = lambda a, b: apply_op(s, "br", a, b)
    d = lambda a: apply_op(s, "D", a)
    x, y, z = var(1), var(2), var(3)
    return (mul(br(x, y), z) + br(mul(x, y), z) - mul(x, br(y, z))
            - br(x, mul(y, z)) - mul(br(x, z), y) - 2 * mul(mul(x, y), d(z)))


def cert_intersection_expansion() -> tuple[Certificate, Variety]:
    """The mixed bracket-product expansion as an exact combination of the two
    intersection axioms."""
    parts = [
        _perm_part(1, "intersect1", (_X, _Z, _Y)),
        _perm_part(1, "intersect1", (_Y, _Z, _X)),
        _perm_part(-1, "intersect1", (_Z, _Y, _X)),
        _perm_part(1, "intersect2", (_Y, _X, _Z)),
        _perm_part(1, "intersect2", (_Z, _Y, _X)),
    ]
    return _named(intersection_expansion_target(), builtin("GP-and-TP"), parts)


def compat_presentation() -> Variety:
    """The intersection variety presented by the two compatibility laws."""
    gp = builtin("GeneralizedPoisson")
    tp = builtin("TransposedPoisson")
    return Variety("GPTP-compat", SIG_POLAR, (
        ("assoc", gp.axiom("assoc")),
        ("jacobi", gp.axiom("jacobi")),
        ("leibniz_d", gp.axiom("leibniz_d")),
        ("transposed_leibniz", tp.axiom("transposed_leibniz")),
    ))


def polarized_pair(d0: bool = False) -> Variety:
    """Polarizations of the coupled one-operation axioms, optionally with the
    derivation deleted."""
    gptp = builtin("GPTPStar")
    if d0:
        from .varieties import delete_derivation
        gptp0 = delete_derivation(gptp)
        return Variety("polarized-pair@D=0", SIG_POLAR_D0, (
            ("polar1", polarize(gptp0.axiom("gptp_star1"), sig_out=SIG_POLAR_D0)),
            ("polar2", polarize(gptp0.axiom("gptp_star2"), sig_out=SIG_POLAR_D0)),
        ))
    return Variety("polarized-pair", SIG_POLAR, (
        ("polar1", polarize(gptp.axiom("gptp_star1"))),
        ("polar2", polarize(gptp.axiom("gptp_star2"))),
    ))


EXACT_CERTIFICATES = {
    "jacobi_from_single_op": cert_jacobi_from_single_op,
    "associator_from_single_op": cert_associator_from_single_op,
    "compat_from_single_op": cert_compat_from_single_op,
    "assoc_from_pair": cert_assoc_from_pair,
    "jacobi_from_pair": cert_jacobi_from_pair,
    "intersection_expansion": cert_intersection_expansion,
}
