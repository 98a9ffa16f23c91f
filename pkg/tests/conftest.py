import itertools

import hypothesis.strategies as st

from gpforge.terms import Apply, Poly, Var, normalize, poly_of
from gpforge.varieties import SIG_POLAR, SIG_STAR


def raw_terms(sig, n_vars=3, max_dpow=1, max_depth=3):
    """Raw term trees over a signature, derivation nodes included."""
    leaves = st.builds(Var,
                       st.integers(min_value=1, max_value=n_vars),
                       st.integers(min_value=0, max_value=max_dpow))

    def extend(children):
        ops = [o.name for o in sig.binary_ops()]
        apps = st.builds(lambda op, a, b: Apply(op, (a, b)),
                         st.sampled_from(ops), children, children)
        if sig.derivation:
            dnode = st.builds(lambda a: Apply(sig.derivation, (a,)), children)
            return st.one_of(apps, dnode)
        return apps

    return st.recursive(leaves, extend, max_leaves=2 ** max_depth)


def polys(sig, n_vars=3, max_terms=3):
    term = raw_terms(sig, n_vars=n_vars)
    coeff = st.fractions(min_value=-3, max_value=3).filter(lambda c: c != 0)
    pair = st.tuples(coeff, term)
    return st.lists(pair, min_size=0, max_size=max_terms).map(
        lambda pairs: sum((normalize(t, sig) * c for c, t in pairs), Poly()))


def brute_force_slice(sig, n, W):
    """Independent slice oracle: every full binary tree over every variable
    order and every leaf derivation-decoration, deduplicated by normalize."""
    def trees(seq):
        if len(seq) == 1:
            yield seq[0]
            return
        for cut in range(1, len(seq)):
            for left in trees(seq[:cut]):
                for right in trees(seq[cut:]):
                    for op in sig.binary_ops():
                        yield Apply(op.name, (left, right))

    found = set()
    variables = list(range(1, n + 1))
    for order in itertools.permutations(variables):
        for dpows in itertools.product(range(W + 1), repeat=n):
            if sum(dpows) > W:
                continue
            leaves = tuple(Var(v, k) for v, k in zip(order, dpows))
            for tree in trees(leaves):
                p = normalize(tree, sig)
                if not p.is_zero():
                    assert len(p.monomials) == 1
                    found.add(p.monomials[0].term)
    return found
