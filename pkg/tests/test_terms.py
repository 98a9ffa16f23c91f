import itertools
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from gpforge.terms import (
    Apply,
    BasisCapExceeded,
    Poly,
    TermError,
    Var,
    apply_op,
    d_apply,
    enumerate_basis,
    from_vector,
    normalize,
    poly_of,
    signature,
    substitute,
    term_key,
    to_vector,
    var,
)
from gpforge.varieties import SIG_POLAR, SIG_POLAR_D0, SIG_STAR, builtin

from conftest import brute_force_slice, polys, raw_terms

S = SIG_POLAR
mul = lambda a, b: apply_op(S, "mul", a, b)
br = lambda a, b: apply_op(S, "br", a, b)
d = lambda a: apply_op(S, "D", a)
a, b, c = var(1), var(2), var(3)


class TestNormalize:
    def test_antisymmetric_square_is_zero(self):
        assert br(a, a).is_zero()

    def test_commutative_sort(self):
        assert (mul(a, b) - mul(b, a)).is_zero()

    def test_leibniz_expansion(self):
        assert d(mul(a, b)) == mul(d(a), b) + mul(a, d(b))

    def test_bracket_leibniz(self):
        assert d_apply(br(a, b), 1, S) == br(d(a), b) + br(a, d(b))

    def test_second_derivative_leaf(self):
        assert d_apply(a, 2, S) == var(1, 2)

    def test_normalize_raw_tree_with_derivation_node(self):
        raw = Apply("D", (Apply("mul", (Var(1), Var(2))),))
        assert normalize(raw, S) == mul(d(a), b) + mul(a, d(b))

    def test_unknown_operation(self):
        with pytest.raises(TermError):
            normalize(Apply("wedge", (Var(1), Var(2))), S)

    def test_arity_mismatch(self):
        with pytest.raises(TermError):
            normalize(Apply("mul", (Var(1),)), S)

    @given(raw_terms(S))
    def test_idempotent(self, t):
        p = normalize(t, S)
        again = sum((normalize(m.term, S) * m.coeff for m in p.monomials), Poly())
        assert again == p

    @given(polys(S), polys(S),
           st.fractions(min_value=-3, max_value=3),
           st.fractions(min_value=-3, max_value=3))
    def test_linear(self, p, q, alpha, beta):
        assert alpha * p + beta * q == (p * alpha) + (q * beta)
        # renormalizing a combination equals combining normal forms
        combo = sum((poly_of(m.term) * m.coeff for m in (alpha * p + beta * q).monomials),
                    Poly())
        assert combo == alpha * p + beta * q

    @given(raw_terms(S), st.permutations([1, 2, 3]))
    def test_permutation_equivariance(self, t, perm):
        mapping = {i + 1: var(v) for i, v in enumerate(perm)}
        left = substitute(normalize(t, S), mapping, S)
        right = normalize(_rename_raw(t, {i + 1: v for i, v in enumerate(perm)}), S)
        assert left == right


def _rename_raw(t, mapping):
    if isinstance(t, Var):
        return Var(mapping.get(t.index, t.index), t.dpow)
    return Apply(t.op, tuple(_rename_raw(x, mapping) for x in t.children))


class TestSubstitute:
    def test_direct_replacement(self):
        assert substitute(br(a, b), {1: mul(a, b), 2: c}, S) == br(mul(a, b), c)

    def test_derivation_image(self):
        assert substitute(mul(a, b), {1: d(a), 2: b}, S) == mul(d(a), b)

    def test_substituting_into_derived_variable(self):
        # x carries a derivation power: the image receives the derivation
        p = poly_of(Var(1, 1))
        assert substitute(p, {1: mul(a, b)}, S) == mul(d(a), b) + mul(a, d(b))

    def test_zinbiel_style_partial_substitution(self):
        zs = signature(("zmul", 2), derivations=("D",))
        z = lambda u, v: apply_op(zs, "zmul", u, v)
        zin = z(z(a, b), c) + z(z(b, a), c) - z(a, z(b, c))
        sub = substitute(zin, {1: apply_op(zs, "D", a)}, zs)
        da = poly_of(Var(1, 1))
        expected = (z(z(da, b), c) + z(z(b, da), c) - z(da, z(b, c)))
        assert sub == expected

    @given(polys(S), polys(S), polys(S))
    def test_linear_in_each_position(self, p, q, r):
        left = substitute(br(a, b), {1: p + q, 2: r}, S)
        right = substitute(br(a, b), {1: p, 2: r}, S) + substitute(br(a, b), {1: q, 2: r}, S)
        assert left == right


class TestDerivationAtPolyLevel:
    @given(polys(S, n_vars=2), polys(S, n_vars=2))
    @settings(max_examples=50)
    def test_product_rule_every_binary_op(self, p, q):
        for op in ("mul", "br"):
            prod = apply_op(S, op, p, q)
            lhs = d_apply(prod, 1, S)
            rhs = apply_op(S, op, d_apply(p, 1, S), q) + apply_op(S, op, p, d_apply(q, 1, S))
            assert lhs == rhs

    def test_requires_declared_derivation(self):
        with pytest.raises(TermError):
            d_apply(var(1), 1, SIG_POLAR_D0)


class TestBasis:
    def test_degree1_weight1_single_op(self):
        sig = signature(("mul", 2, "symmetric"), derivations=("D",))
        basis = enumerate_basis(1, 1, sig)
        assert len(basis) == 2
        assert set(basis.terms) == {Var(1, 0), Var(1, 1)}

    def test_two_ops_degree3(self):
        assert len(enumerate_basis(3, 0, SIG_POLAR_D0)) == 12
        assert len(enumerate_basis(3, 1, SIG_POLAR)) == 48

    @pytest.mark.parametrize("n,W", [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (4, 0)])
    def test_against_brute_force_oracle(self, n, W):
        sig = SIG_POLAR if W else SIG_POLAR_D0
        basis = enumerate_basis(n, W, sig)
        oracle = brute_force_slice(sig, n, W)
        assert set(basis.terms) == oracle

    def test_brute_force_star_weight2(self):
        basis = enumerate_basis(3, 2, SIG_STAR)
        oracle = brute_force_slice(SIG_STAR, 3, 2)
        assert set(basis.terms) == oracle

    def test_cap(self):
        with pytest.raises(BasisCapExceeded):
            enumerate_basis(4, 2, SIG_POLAR, cap=10)

    def test_terms_sorted_and_unique(self):
        basis = enumerate_basis(3, 1, SIG_POLAR)
        keys = [term_key(t) for t in basis.terms]
        assert keys == sorted(keys)
        assert len(set(basis.terms)) == len(basis)


class TestVectorization:
    def test_zero_maps_to_zero_vector(self):
        basis = enumerate_basis(2, 0, SIG_POLAR_D0)
        assert to_vector(Poly(), basis) == (Fraction(0),) * len(basis)

    def test_basis_term_is_unit_vector(self):
        basis = enumerate_basis(2, 1, SIG_POLAR)
        for i, t in enumerate(basis.terms):
            vec = to_vector(poly_of(t), basis)
            assert vec[i] == 1 and sum(map(abs, vec)) == 1

    def test_round_trip_both_ways(self):
        basis = enumerate_basis(3, 1, SIG_POLAR)
        p = mul(br(a, b), c) - 2 * mul(mul(a, b), d(c))
        assert from_vector(to_vector(p, basis), basis) == p
        vec = tuple(Fraction(i - 3, 2) for i in range(len(basis)))
        assert to_vector(from_vector(vec, basis), basis) == vec

    def test_single_op_axiom_vector_profile(self):
        # frozen from the expansion oracle: 14 monomials, coefficients
        # {-3, 3} once each, 1 six times, -1 twice, 1/2 four times
        psi = builtin("GPStar").axiom("gp_star")
        basis = enumerate_basis(3, 1, SIG_STAR)
        vec = to_vector(psi, basis)
        profile = Counter(c for c in vec if c)
        assert profile == Counter({Fraction(1): 6, Fraction(1, 2): 4,
                                   Fraction(-1): 2, Fraction(-3): 1, Fraction(3): 1})

    def test_term_outside_basis(self):
        basis = enumerate_basis(2, 0, SIG_POLAR_D0)
        with pytest.raises(TermError):
            to_vector(mul(a, d(b)), basis)


class TestSignatureValidation:
    def test_duplicate_names_rejected(self):
        with pytest.raises(TermError):
            signature(("mul", 2), ("mul", 2))

    def test_two_derivations_rejected(self):
        with pytest.raises(TermError):
            signature(("mul", 2), derivations=("D", "E"))

    def test_bad_arity(self):
        with pytest.raises(TermError):
            signature(("mul", 3))
