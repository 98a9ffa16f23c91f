import pytest

from gpforge.terms import Poly, TermError, apply_op, poly_of, substitute, var
from gpforge.varieties import (
    BUILTIN_NAMES,
    SIG_POLAR,
    SIG_POLAR_D0,
    SIG_STAR_D0,
    Variety,
    builtin,
    delete_derivation,
    merge,
    multilinearize,
)

S = SIG_POLAR
mul = lambda u, v: apply_op(S, "mul", u, v)
br = lambda u, v: apply_op(S, "br", u, v)
d = lambda u: apply_op(S, "D", u)
a, b, c = var(1), var(2), var(3)


class TestBuiltins:
    def test_all_names_resolve(self):
        for name in BUILTIN_NAMES:
            v = builtin(name)
            assert v.axioms, name

    def test_unknown_name(self):
        with pytest.raises(TermError):
            builtin("Nope")

    def test_lie_axioms(self):
        lie = builtin("Lie")
        assert lie.axiom_names() == ("jacobi",)
        sb = lie.sig
        brr = lambda u, v: apply_op(sb, "br", u, v)
        jac = brr(brr(a, b), c) + brr(brr(b, c), a) + brr(brr(c, a), b)
        assert lie.axiom("jacobi") == jac

    def test_twisted_compatibility_polynomial(self):
        gp = builtin("GeneralizedPoisson")
        expected = (br(mul(a, b), c) - mul(a, br(b, c)) - mul(br(a, c), b)
                    - mul(mul(a, b), d(c)))
        assert gp.axiom("leibniz_d") == expected

    def test_transposed_compatibility_polynomial(self):
        tp = builtin("TransposedPoisson")
        expected = 2 * mul(a, br(b, c)) - br(mul(a, b), c) - br(b, mul(a, c))
        assert tp.axiom("transposed_leibniz") == expected

    def test_poisson_is_derivation_free_degeneration(self):
        gp = delete_derivation(builtin("GeneralizedPoisson"))
        poisson = builtin("Poisson")
        assert [p for _, p in gp.axioms] == [p for _, p in poisson.axioms]
        assert gp.sig.derivations == ()

    def test_pair_degenerates_to_reverse_associativity(self):
        pair0 = delete_derivation(builtin("GPTPStar"))
        rev = builtin("ReverseAssociative")
        assert pair0.axiom("gptp_star1") == rev.axiom("reverse_assoc")

    def test_axioms_are_multilinear(self):
        from gpforge.terms import is_multilinear
        for name in BUILTIN_NAMES:
            for _, p in builtin(name).axioms:
                assert is_multilinear(p)

    def test_zinbiel_axiom_shape(self):
        z = builtin("Zinbiel")
        zs = z.sig
        zm = lambda u, v: apply_op(zs, "zmul", u, v)
        assert z.axiom("zinbiel") == zm(zm(a, b), c) + zm(zm(b, a), c) - zm(a, zm(b, c))


class TestVarietyObject:
    def test_duplicate_axiom_names_rejected(self):
        p = builtin("CommAssoc").axiom("assoc")
        with pytest.raises(TermError):
            Variety("bad", builtin("CommAssoc").sig, (("a", p), ("a", p)))

    def test_non_multilinear_axiom_rejected(self):
        sq = mul(a, a)
        with pytest.raises(TermError):
            Variety("bad", SIG_POLAR, (("sq", sq),))

    def test_with_derivation_extends_signature(self):
        ca = builtin("CommAssoc").with_derivation()
        assert ca.sig.derivation == "D"
        assert ca.axioms == builtin("CommAssoc").axioms

    def test_merge(self):
        both = merge("PoissonAgain", builtin("CommAssoc").with_derivation(),
                     )
        assert both.axiom_names() == ("assoc",)


class TestMultilinearize:
    def test_square_polarizes(self):
        result = multilinearize(mul(a, a), S)
        assert result == [2 * mul(a, b)]

    def test_jacobi_already_multilinear(self):
        jac = builtin("GeneralizedPoisson").axiom("jacobi")
        assert multilinearize(jac, S) == [jac]

    def test_zinbiel_already_multilinear(self):
        z = builtin("Zinbiel")
        assert multilinearize(z.axiom("zinbiel"), z.sig) == [z.axiom("zinbiel")]

    def test_cube_gives_symmetrized_expansion(self):
        cube = mul(mul(a, a), a)
        (result,) = multilinearize(cube, S)
        # six orderings of three fresh variables, commutativity merges them
        total = sum(abs(m.coeff) for m in result.monomials)
        assert total == 6
        sub_back = substitute(result, {1: a, 2: a, 3: a}, S)
        assert sub_back == 6 * cube

    def test_mixed_degrees_split(self):
        p = mul(a, a) + br(a, b)
        parts = multilinearize(p, S)
        assert len(parts) == 2
