"""Sum-of-two-abelian-subalgebras checks on concrete models.

Given a model P certified for the derivation-twisted compatibility variety
and subspaces A, B, the hypotheses are: A and B are abelian (all pairwise
products and brackets vanish, which also makes them subalgebras) and
A + B = P by rank.  The conclusion checked is metatriviality, operationalized
as: the derived subspace P^2, spanned by all products and brackets of basis
pairs, is a D-stable ideal on which both operations vanish.  The ideal and
stability properties are re-verified computationally on every run rather
than assumed.

The proof-stage relations (degree-four products and brackets vanishing in
various arrangements) are evaluated on every basis 4-tuple; one mixed
relation additionally quantifies over the two subspaces.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .linalg import RowSpace
from .models import (
    ModelError,
    SparseVec,
    TableAlgebra,
    check_axioms,
    sparse_add_scaled,
    to_dense,
    to_sparse,
)
from .varieties import builtin

DEFAULT_DIM_CAP = 4


def gp_variety(noncommutative: bool = False):
    """The certification target; the flag drops the commutativity of the dot."""
    v = builtin("GeneralizedPoisson")
    if not noncommutative:
        return v
    from .terms import PLAIN, Operation, OperationSignature
    ops = tuple(Operation(o.name, o.arity, PLAIN if o.name == "mul" else o.symmetry)
                for o in v.sig.ops)
    sig = OperationSignature(ops, v.sig.derivations)
    from .varieties import Variety
    return Variety("GeneralizedPoisson-noncomm", sig, v.axioms)


@dataclass
class Decomposition:
    """A model with two spanning-subspace candidates."""

    P: TableAlgebra
    A: tuple[SparseVec, ...]
    B: tuple[SparseVec, ...]
    label: str = ""

    @staticmethod
    def from_vectors(P: TableAlgebra, A: Iterable, B: Iterable, label: str = "") -> "Decomposition":
        return Decomposition(P,
                             tuple(to_sparse(a, P.dim) for a in A),
                             tuple(to_sparse(b, P.dim) for b in B),
                             label)


@dataclass(frozen=True)
class HypothesesReport:
    passed: bool
    witness: str | None = None


@dataclass(frozen=True)
class RelationVerdict:
    name: str
    passed: bool
    witness: tuple[int, ...] | None = None


@dataclass(frozen=True)
class RelationsReport:
    verdicts: tuple[RelationVerdict, ...]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


@dataclass(frozen=True)
class MetatrivialReport:
    passed: bool
    derived_rank: int
    witness: str | None = None


def _pairwise_zero(m: TableAlgebra, vectors: Sequence[SparseVec], ops=("mul", "br")):
    for op in ops:
        for i, u in enumerate(vectors):
            for j, v in enumerate(vectors):
                if m.bilinear(op, u, v):
                    return op, i, j
    return None


def check_hypotheses(d: Decomposition) -> HypothesesReport:
    """Abelianness of both subspaces and the rank condition span(A)+span(B)=P."""
    for side, vectors in (("A", d.A), ("B", d.B)):
        hit = _pairwise_zero(d.P, vectors)
        if hit is not None:
            op, i, j = hit
            return HypothesesReport(False, f"{side} is not abelian: {op} of its "
                                           f"vectors {i} and {j} is nonzero")
    space = RowSpace(d.P.dim)
    for v in d.A + d.B:
        space.add(to_dense(v, d.P.dim))
    if space.rank != d.P.dim:
        return HypothesesReport(False, f"span(A)+span(B) has rank {space.rank}, "
                                       f"expected {d.P.dim}")
    return HypothesesReport(True)


# Degree-four proof-stage relations, evaluated on all basis 4-tuples.
# Unparenthesized products associate to the left; the dot certification
# makes the grouping immaterial.
def _relation_evaluators(m: TableAlgebra):
    mul = lambda u, v: m.bilinear("mul", u, v)
    br = lambda u, v: m.bilinear("br", u, v)
    return {
        "cccc": lambda c1, c2, c3, c4: mul(mul(mul(c1, c2), c3), c4),
        "c[cc]c": lambda c1, c2, c3, c4: mul(mul(c1, br(c2, c3)), c4),
        "cc[cc]": lambda c1, c2, c3, c4: mul(mul(c1, c2), br(c3, c4)),
        "[cc]cc": lambda c1, c2, c3, c4: mul(mul(br(c1, c2), c3), c4),
        "[cc,cc]": lambda c1, c2, c3, c4: br(mul(c1, c2), mul(c3, c4)),
        "[ccc,c]": lambda c1, c2, c3, c4: br(mul(mul(c1, c2), c3), c4),
        "[cc,[cc]]": lambda c1, c2, c3, c4: br(mul(c1, c2), br(c3, c4)),
        "[cc][cc]": lambda c1, c2, c3, c4: mul(br(c1, c2), br(c3, c4)),
    }


MIXED_RELATION = "baD([ab])"


def proof_relation_names() -> tuple[str, ...]:
    return tuple(_relation_evaluators(zero_stub())) + (MIXED_RELATION,)


def zero_stub() -> TableAlgebra:
    return TableAlgebra(1, {"mul": {}, "br": {}}, {"D": ({},)})


def check_proof_relations(d: Decomposition) -> RelationsReport:
    """Evaluate every proof-stage relation; the mixed relation quantifies over
    spanning vectors of A and B, the rest over all basis 4-tuples of P."""
    m = d.P
    verdicts: list[RelationVerdict] = []
    for name, fn in _relation_evaluators(m).items():
        witness = None
        for idx in itertools.product(range(m.dim), repeat=4):
            units = [{i: 1} for i in idx]
            if fn(*units):
                witness = idx
                break
        verdicts.append(RelationVerdict(name, witness is None, witness))

    witness = None
    for i1, a1 in enumerate(d.A):
        for i2, b2 in enumerate(d.B):
            for i3, a3 in enumerate(d.A):
                for i4, b4 in enumerate(d.B):
                    inner = m.derive_vec("D", m.bilinear("br", a3, b4))
                    if m.bilinear("mul", m.bilinear("mul", b2, a1), inner):
                        witness = (i1, i2, i3, i4)
                        break
                if witness:
                    break
            if witness:
                break
        if witness:
            break
    verdicts.append(RelationVerdict(MIXED_RELATION, witness is None, witness))
    return RelationsReport(tuple(verdicts))


def check_metatrivial(P: TableAlgebra, gp_name: str = "GeneralizedPoisson") -> MetatrivialReport:
    """P^2 must be a D-stable ideal with both operations vanishing on it."""
    if gp_name not in P.certified:
        raise ModelError(f"model {P.name or '?'} is not certified for {gp_name}")
    derived = RowSpace(P.dim)
    generators: list[SparseVec] = []
    for op in ("mul", "br"):
        for i in range(P.dim):
            for j in range(P.dim):
                v = P.product(op, i, j)
                if v and derived.add(to_dense(v, P.dim)):
                    generators.append(v)
    basis = [to_sparse(dict(enumerate(row)), P.dim) for row in derived.basis()]

    for u in basis:
        for op in ("mul", "br"):
            for i in range(P.dim):
                for prod in (P.bilinear(op, {i: 1}, u), P.bilinear(op, u, {i: 1})):
                    if prod and not derived.contains(to_dense(prod, P.dim)):
                        return MetatrivialReport(False, derived.rank,
                                                 f"P^2 is not an ideal: {op} escapes")
        img = P.derive_vec("D", u)
        if img and not derived.contains(to_dense(img, P.dim)):
            return MetatrivialReport(False, derived.rank, "P^2 is not D-stable")

    for op in ("mul", "br"):
        for u in basis:
            for v in basis:
                if P.bilinear(op, u, v):
                    return MetatrivialReport(False, derived.rank,
                                             f"operations do not vanish on P^2 ({op})")
    return MetatrivialReport(True, derived.rank)


# ---------------------------------------------------------------------------
# Decomposition search


def search_decompositions(P: TableAlgebra, mode: str = "coordinate", seed: int = 0,
                          samples: int = 50, dim_cap: int = DEFAULT_DIM_CAP) -> list[Decomposition]:
    """Subspace pairs passing the hypotheses.

    Coordinate mode enumerates all pairs of coordinate subspaces whose index
    sets cover the basis (each index sits in A, in B, or in both).  Random
    mode draws seeded rational subspace pairs and keeps the ones that pass."""
    if P.dim > dim_cap:
        raise ModelError(f"dimension {P.dim} exceeds the search cap {dim_cap}")
    out: list[Decomposition] = []
    if mode == "coordinate":
        for assignment in itertools.product((0, 1, 2), repeat=P.dim):
            A = [{i: 1} for i, a in enumerate(assignment) if a in (0, 2)]
            B = [{i: 1} for i, a in enumerate(assignment) if a in (1, 2)]
            d = Decomposition(P, tuple(A), tuple(B), label=f"coord{assignment}")
            if check_hypotheses(d).passed:
                out.append(d)
        return out
    if mode == "random":
        rng = random.Random(f"gpforge-ito-{P.name}-{seed}")
        seen: set[str] = set()
        for trial in range(samples):
            ka = rng.randint(1, P.dim)
            kb = rng.randint(1, P.dim)
            A = tuple({j: Fraction(rng.randint(-2, 2)) for j in range(P.dim)}
                      for _ in range(ka))
            B = tuple({j: Fraction(rng.randint(-2, 2)) for j in range(P.dim)}
                      for _ in range(kb))
            A = tuple({k: c for k, c in v.items() if c} for v in A)
            B = tuple({k: c for k, c in v.items() if c} for v in B)
            d = Decomposition(P, A, B, label=f"random{trial}")
            if check_hypotheses(d).passed and d.label not in seen:
                seen.add(d.label)
                out.append(d)
        return out
    raise ModelError(f"unknown search mode {mode!r}")


# ---------------------------------------------------------------------------
# Aggregate run (CLI-facing)


@dataclass(frozen=True)
class ItoReport:
    model: str
    noncommutative: bool
    decompositions: int
    hypotheses_passed: int
    relations_ok: bool
    metatrivial: MetatrivialReport | None
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def run_ito(P: TableAlgebra, mode: str = "coordinate", seed: int = 0,
            noncommutative: bool = False, dim_cap: int = DEFAULT_DIM_CAP) -> ItoReport:
    """Search decompositions and check the conclusion on each hit.

    A violation (a decomposition passing the hypotheses while the relations
    or the metatriviality check fail) would contradict the structure theorem
    or reveal a bug; either way it is reportable."""
    v = gp_variety(noncommutative)
    if v.name not in P.certified:
        report = check_axioms(P, v)
        if not report.passed:
            raise ModelError(f"model is not a {v.name} algebra: "
                             f"{report.failure.describe(P)}")
    decs = search_decompositions(P, mode=mode, seed=seed, dim_cap=dim_cap)
    violations: list[str] = []
    meta = None
    if decs:
        meta = check_metatrivial(P, v.name)
        if not meta.passed:
            violations.append(f"metatriviality failed: {meta.witness}")
        for d in decs:
            rel = check_proof_relations(d)
            if not rel.passed:
                bad = [r.name for r in rel.verdicts if not r.passed]
                violations.append(f"{d.label}: relations failed: {', '.join(bad)}")
    return ItoReport(P.name, noncommutative, len(decs), len(decs),
                     all("relations" not in v for v in violations),
                     meta, tuple(violations))
