"""Finite-dimensional algebras by structure constants, with exact checks.

A TableAlgebra stores sparse structure constants per binary operation plus
derivation matrices.  Axiom certification evaluates every axiom on every
basis tuple (multilinearity makes that sufficient) and additionally verifies
the symmetry flags and the Leibniz property of each derivation; nothing ever
enters the ``certified`` set without passing those checks.

Built-in families: truncated polynomial algebras (derivations x^j d/dx with
j >= 1, since d/dx itself breaks Leibniz at the truncation boundary), the
free right-commutative word algebra under the half-shuffle product, and its
integral realization on polynomial degrees.  Randomized commutative
associative models come from constructions that are correct by design
(monomial-staircase quotients, null blocks, direct sums, rescalings) rather
than rejection sampling.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .terms import Apply, OperationSignature, Poly, Term, TermError, Var, term_variables
from .varieties import Variety, builtin

Coeff = object  # int | Fraction, promoted as needed
SparseVec = dict

DEFAULT_MODEL_CAP = 64


class ModelError(ValueError):
    """Inconsistent model data or incompatible model/variety pairing."""


def _scale(c):
    # keep exact integer arithmetic on the fast path
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def sparse_add_scaled(acc: SparseVec, v: SparseVec, c) -> None:
    c = _scale(c)
    if c == 0:
        return
    for k, x in v.items():
        y = acc.get(k, 0) + c * x
        if y == 0:
            acc.pop(k, None)
        else:
            acc[k] = y


def to_sparse(v, dim: int) -> SparseVec:
    if isinstance(v, dict):
        return {k: _scale(Fraction(x)) for k, x in v.items() if x != 0}
    if isinstance(v, int):
        if not 0 <= v < dim:
            raise ModelError(f"basis index {v} out of range")
        return {v: 1}
    vec = list(v)
    if len(vec) != dim:
        raise ModelError("vector length does not match model dimension")
    return {i: _scale(Fraction(x)) for i, x in enumerate(vec) if x != 0}


def to_dense(v: SparseVec, dim: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(v.get(i, 0)) for i in range(dim))


@dataclass
class TableAlgebra:
    """Structure constants per operation plus derivation matrices.

    Tables map (i, j) -> sparse vector of e_i op e_j; derivation entries map
    the basis index i to the sparse image of e_i.  Tables are treated as
    immutable after construction; only ``certified`` grows."""

    dim: int
    tables: dict[str, dict[tuple[int, int], SparseVec]]
    dmats: dict[str, tuple[SparseVec, ...]] = field(default_factory=dict)
    certified: set[str] = field(default_factory=set)
    basis_labels: tuple[str, ...] = ()
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.basis_labels:
            self.basis_labels = tuple(f"e{i + 1}" for i in range(self.dim))
        if len(self.basis_labels) != self.dim:
            raise ModelError("basis label count does not match dimension")

    def product(self, op: str, i: int, j: int) -> SparseVec:
        return self.tables[op].get((i, j), {})

    def bilinear(self, op: str, u: SparseVec, v: SparseVec) -> SparseVec:
        table = self.tables[op]
        out: SparseVec = {}
        for i, cu in u.items():
            for j, cv in v.items():
                w = table.get((i, j))
                if w:
                    sparse_add_scaled(out, w, cu * cv)
        return out

    def derive_vec(self, name: str, u: SparseVec) -> SparseVec:
        rows = self.dmats[name]
        out: SparseVec = {}
        for i, c in u.items():
            sparse_add_scaled(out, rows[i], c)
        return out

    def copy_with(self, **updates) -> "TableAlgebra":
        data = dict(dim=self.dim, tables=self.tables, dmats=self.dmats,
                    certified=set(self.certified), basis_labels=self.basis_labels,
                    name=self.name, meta=dict(self.meta))
        data.update(updates)
        return TableAlgebra(**data)


# ---------------------------------------------------------------------------
# Evaluation


def eval_identity(m: TableAlgebra, p: Poly, assignment: Sequence) -> tuple[Fraction, ...]:
    """Exact value of a polynomial under an assignment of model elements.

    Assignment entries may be basis indices, dense sequences, or sparse
    dicts.  Linear in ``p``."""
    vectors = [to_sparse(a, m.dim) for a in assignment]
    total: SparseVec = {}
    for mono in p.monomials:
        val = _eval_term(m, mono.term, vectors)
        sparse_add_scaled(total, val, mono.coeff)
    return to_dense(total, m.dim)


def _eval_term(m: TableAlgebra, t: Term, vectors: list[SparseVec]) -> SparseVec:
    if isinstance(t, Var):
        if t.index - 1 >= len(vectors):
            raise ModelError(f"assignment covers {len(vectors)} variables, "
                             f"term mentions x{t.index}")
        val = vectors[t.index - 1]
        for _ in range(t.dpow):
            val = _apply_any_derivation(m, val)
        return val
    if len(t.children) != 2:
        raise ModelError(f"model evaluation supports binary operations only, got {t.op}")
    if t.op not in m.tables:
        raise ModelError(f"model has no table for operation {t.op!r}")
    u = _eval_term(m, t.children[0], vectors)
    v = _eval_term(m, t.children[1], vectors)
    return m.bilinear(t.op, u, v)


def _apply_any_derivation(m: TableAlgebra, u: SparseVec) -> SparseVec:
    if len(m.dmats) != 1:
        raise ModelError("term uses a derivation power but the model does not "
                         "carry exactly one derivation")
    (name,) = m.dmats
    return m.derive_vec(name, u)


@dataclass(frozen=True)
class Failure:
    kind: str                 # "symmetry" | "leibniz" | "axiom" | "signature"
    subject: str              # operation or axiom name
    indices: tuple[int, ...]
    residual: tuple           # dense residual vector (possibly empty)

    def describe(self, m: TableAlgebra | None = None) -> str:
        labels = (m.basis_labels if m is not None else
                  tuple(f"e{i + 1}" for i in range(max(self.indices, default=0) + 1)))
        where = ", ".join(labels[i] for i in self.indices) if self.indices else "-"
        return f"{self.kind} failure for {self.subject} at ({where})"


@dataclass(frozen=True)
class CheckReport:
    variety: str
    passed: bool
    failure: Failure | None = None


def _check_poly_on_basis(m: TableAlgebra, p: Poly, nvars: int,
                         dnames: tuple[str, ...]) -> tuple[tuple[int, ...], SparseVec] | None:
    """First basis tuple with a nonzero value, or None.  Subterm values are
    memoized on (subterm, its projected indices) so inner products are reused
    across the tuple sweep."""
    term_ids: dict[Term, int] = {}
    term_vars: dict[int, tuple[int, ...]] = {}
    dcache: dict[tuple[int, int], SparseVec] = {}

    def intern(t: Term) -> int:
        tid = term_ids.get(t)
        if tid is None:
            tid = len(term_ids)
            term_ids[t] = tid
            term_vars[tid] = tuple(sorted(set(term_variables(t))))
            if isinstance(t, Apply):
                for c in t.children:
                    intern(c)
        return tid

    def dpow_vec(i: int, k: int) -> SparseVec:
        key = (i, k)
        val = dcache.get(key)
        if val is None:
            if k == 0:
                val = {i: 1}
            else:
                prev = dpow_vec(i, k - 1)
                val = m.derive_vec(dnames[0], prev)
            dcache[key] = val
        return val

    memo: dict[tuple[int, tuple[int, ...]], SparseVec] = {}

    def eval_term(t: Term, idx: tuple[int, ...]) -> SparseVec:
        if isinstance(t, Var):
            return dpow_vec(idx[t.index - 1], t.dpow)
        tid = term_ids[t]
        proj = tuple(idx[v - 1] for v in term_vars[tid])
        key = (tid, proj)
        val = memo.get(key)
        if val is None:
            u = eval_term(t.children[0], idx)
            v = eval_term(t.children[1], idx)
            val = m.bilinear(t.op, u, v)
            memo[key] = val
        return val

    for mono in p.monomials:
        intern(mono.term)
    for t in term_ids:
        if isinstance(t, Apply):
            if len(t.children) != 2:
                raise ModelError(f"model evaluation supports binary operations only, got {t.op}")
            if t.op not in m.tables:
                raise ModelError(f"model has no table for operation {t.op!r}")

    for idx in itertools.product(range(m.dim), repeat=nvars):
        total: SparseVec = {}
        for mono in p.monomials:
            sparse_add_scaled(total, eval_term(mono.term, idx), mono.coeff)
        if total:
            return idx, total
    return None


def check_axioms(m: TableAlgebra, v: Variety) -> CheckReport:
    """Certify a model against a variety: symmetry flags, derivation Leibniz
    property, and every axiom on every basis tuple.  Adds the variety name to
    ``m.certified`` on success."""
    for op in v.sig.binary_ops():
        if op.name not in m.tables:
            raise ModelError(f"model {m.name or '?'} has no table for {op.name!r}")
    for dname in v.sig.derivations:
        if dname not in m.dmats:
            raise ModelError(f"model {m.name or '?'} has no derivation {dname!r}")

    for op in v.sig.binary_ops():
        fail = _check_symmetry(m, op.name, op.symmetry)
        if fail is not None:
            return CheckReport(v.name, False, fail)

    for dname in v.sig.derivations:
        for op in v.sig.binary_ops():
            for (i, j), defect in leibniz_defects(m, op.name, dname):
                return CheckReport(v.name, False, Failure(
                    "leibniz", f"{dname} over {op.name}", (i, j), to_dense(defect, m.dim)))

    for ax_name, ax in v.axioms:
        nvars = max((max(term_variables(mono.term)) for mono in ax.monomials), default=0)
        hit = _check_poly_on_basis(m, ax, nvars, v.sig.derivations)
        if hit is not None:
            idx, residual = hit
            return CheckReport(v.name, False, Failure(
                "axiom", ax_name, idx, to_dense(residual, m.dim)))

    m.certified.add(v.name)
    return CheckReport(v.name, True)


def _check_symmetry(m: TableAlgebra, op: str, symmetry: str) -> Failure | None:
    from .terms import ANTISYMMETRIC, SYMMETRIC
    if symmetry not in (SYMMETRIC, ANTISYMMETRIC):
        return None
    table = m.tables[op]
    for i in range(m.dim):
        for j in range(i, m.dim):
            a = table.get((i, j), {})
            b = table.get((j, i), {})
            if symmetry == SYMMETRIC:
                ok = a == b
            else:
                neg = {k: -c for k, c in b.items()}
                ok = a == neg and (i != j or not a)
            if not ok:
                residual: SparseVec = dict(a)
                sparse_add_scaled(residual, b, -1 if symmetry == SYMMETRIC else 1)
                return Failure("symmetry", op, (i, j), to_dense(residual, m.dim))
    return None


def leibniz_defects(m: TableAlgebra, op: str, dname: str) -> list[tuple[tuple[int, int], SparseVec]]:
    """All basis pairs where D(u op v) - D(u) op v - u op D(v) is nonzero."""
    rows = m.dmats[dname]
    out = []
    for i in range(m.dim):
        for j in range(m.dim):
            defect: SparseVec = {}
            sparse_add_scaled(defect, m.derive_vec(dname, m.product(op, i, j)), 1)
            sparse_add_scaled(defect, m.bilinear(op, rows[i], {j: 1}), -1)
            sparse_add_scaled(defect, m.bilinear(op, {i: 1}, rows[j]), -1)
            if defect:
                out.append(((i, j), defect))
    return out


# ---------------------------------------------------------------------------
# Built-in families


def truncated_poly_model(order: int, der: object = "euler") -> TableAlgebra:
    """Polynomials modulo x^order with basis 1, x, ..., x^(order-1).

    ``der`` is "euler" (x d/dx) or an integer j >= 1 for x^j d/dx; plain
    d/dx is rejected because it is not a derivation of the quotient."""
    if order < 1:
        raise ModelError("order must be >= 1")
    j = 1 if der == "euler" else int(der)
    if j < 1:
        raise ModelError("derivation exponent must be >= 1 "
                         "(d/dx breaks Leibniz at the truncation boundary)")
    table = {}
    for a in range(order):
        for b in range(order):
            if a + b < order:
                table[(a, b)] = {a + b: 1}
    rows = []
    for k in range(order):
        img = k + j - 1
        rows.append({img: k} if k and img < order else {})
    labels = tuple("1" if k == 0 else ("x" if k == 1 else f"x^{k}") for k in range(order))
    m = TableAlgebra(order, {"mul": table}, {"D": tuple(rows)},
                     basis_labels=labels, name=f"F[x]/(x^{order})",
                     meta={"family": "truncated_poly", "order": order, "der_exponent": j})
    check_axioms(m, builtin("CommAssoc").with_derivation())
    return m


def _shuffle(u: tuple, v: tuple, memo: dict) -> dict:
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    key = (u, v)
    cached = memo.get(key)
    if cached is None:
        cached = {}
        for w, c in _shuffle(u[:-1], v, memo).items():
            cached[w + (u[-1],)] = cached.get(w + (u[-1],), 0) + c
        for w, c in _shuffle(u, v[:-1], memo).items():
            cached[w + (v[-1],)] = cached.get(w + (v[-1],), 0) + c
        memo[key] = cached
    return cached


def half_shuffle(u: tuple, v: tuple, memo: dict | None = None) -> dict:
    """u * v = (u shuffled with v minus its last letter), last letter appended.

    The designated last letter of the right factor stays last, matching the
    integral realization g -> integral of f."""
    if memo is None:
        memo = {}
    out = {}
    for w, c in _shuffle(u, v[:-1], memo).items():
        out[w + (v[-1],)] = out.get(w + (v[-1],), 0) + c
    return out


def free_zinbiel_model(generators: int, cap: int) -> TableAlgebra:
    """Word algebra on nonempty words of length <= cap under the half-shuffle.

    Words longer than the cap span an ideal, so truncation yields a genuine
    quotient of the same variety."""
    if generators < 1 or cap < 1:
        raise ModelError("need at least one generator and a positive cap")
    words: list[tuple] = []
    for length in range(1, cap + 1):
        words.extend(itertools.product(range(generators), repeat=length))
    index = {w: i for i, w in enumerate(words)}
    memo: dict = {}
    table = {}
    for i, u in enumerate(words):
        for j, v in enumerate(words):
            if len(u) + len(v) > cap:
                continue
            entry = {}
            for w, c in half_shuffle(u, v, memo).items():
                entry[index[w]] = c
            if entry:
                table[(i, j)] = entry
    labels = tuple("".join(f"g{l + 1}" for l in w) for w in words)
    m = TableAlgebra(len(words), {"zmul": table},
                     basis_labels=labels, name=f"FreeZinbiel({generators},{cap})",
                     meta={"family": "free_zinbiel", "generators": generators,
                           "cap": cap, "words": tuple(words)})
    return m


def integral_zinbiel_model(order: int, constants: bool = True,
                           with_ddx: bool = True) -> TableAlgebra:
    """Polynomial degrees under f * g = g . (integral of f), truncated.

    With ``constants`` the basis is 1, x, ..., x^(order-1) and d/dx is
    attached as a plain linear map; it is *not* a derivation of the product
    (the Leibniz defect g.f(0) plus truncation-boundary terms is reported by
    ``leibniz_defects``, never suppressed).  Without constants the basis is
    x, ..., x^(order-1); the product still closes, but d/dx escapes the
    subspace (D(x) = 1), so requesting it raises."""
    if order < 2:
        raise ModelError("order must be >= 2")
    exps = list(range(0 if constants else 1, order))
    index = {e: i for i, e in enumerate(exps)}
    table = {}
    for i, a in enumerate(exps):
        for j, b in enumerate(exps):
            e = a + b + 1
            if e < order:
                table[(i, j)] = {index[e]: Fraction(1, a + 1)}
    labels = tuple("1" if e == 0 else ("x" if e == 1 else f"x^{e}") for e in exps)
    dmats = {}
    if with_ddx:
        if not constants:
            raise ModelError("d/dx escapes the constant-free filtered submodel: "
                             "D(x) = 1 is not in the span of x, x^2, ...")
        rows = []
        for e in exps:
            rows.append({index[e - 1]: e} if e >= 1 else {})
        dmats["D"] = tuple(rows)
    m = TableAlgebra(len(exps), {"zmul": table}, dmats, basis_labels=labels,
                     name=f"IntegralZinbiel({order},constants={constants})",
                     meta={"family": "integral_zinbiel", "order": order,
                           "constants": constants})
    return m


def extend_derivation(m: TableAlgebra, images: Mapping[int, object],
                      on_escape: str = "error") -> tuple[SparseVec, ...]:
    """Unique Leibniz extension of generator images on a free word model.

    Computed by the recursion D(w a) = D(w) * a + w * D(a) in the untruncated
    word space; components beyond the cap are escapes, reported (on_escape =
    "error") or dropped ("truncate").  The returned matrix is validated
    against the Leibniz check on all basis pairs."""
    if m.meta.get("family") != "free_zinbiel":
        raise ModelError("extend_derivation expects a free word model")
    words: tuple = m.meta["words"]
    cap: int = m.meta["cap"]
    gens: int = m.meta["generators"]
    index = {w: i for i, w in enumerate(words)}

    img_words: dict[int, dict] = {}
    for g in range(1, gens + 1):
        vec = to_sparse(images.get(g, {}), m.dim)
        img_words[g - 1] = {words[i]: c for i, c in vec.items()}

    memo: dict = {}
    shuffle_memo: dict = {}
    escapes: list[tuple[tuple, tuple, object]] = []

    def word_mul(uvec: dict, vvec: dict) -> dict:
        out: dict = {}
        for u, cu in uvec.items():
            for v, cv in vvec.items():
                for w, c in half_shuffle(u, v, shuffle_memo).items():
                    y = out.get(w, 0) + cu * cv * c
                    if y == 0:
                        out.pop(w, None)
                    else:
                        out[w] = y
        return out

    def d_word(w: tuple) -> dict:
        val = memo.get(w)
        if val is None:
            if len(w) == 1:
                val = dict(img_words[w[0]])
            else:
                u, a = w[:-1], w[-1:]
                val = word_mul(d_word(u), {a: 1})
                for k, c in word_mul({u: 1}, d_word(a)).items():
                    y = val.get(k, 0) + c
                    if y == 0:
                        val.pop(k, None)
                    else:
                        val[k] = y
            memo[w] = val
        return val

    rows = []
    for w in words:
        img = d_word(w)
        kept: SparseVec = {}
        for out_word, c in img.items():
            if len(out_word) > cap:
                escapes.append((w, out_word, c))
            else:
                kept[index[out_word]] = c
        rows.append(kept)

    if escapes and on_escape == "error":
        w, out_word, c = escapes[0]
        raise ModelError(
            f"derivation image escapes the degree cap {cap}: "
            f"D({_word_label(w)}) has coefficient {c} on {_word_label(out_word)}; "
            f"raise the cap or pass on_escape='truncate' ({len(escapes)} escapes total)")

    result = tuple(rows)
    probe = m.copy_with(dmats={**m.dmats, "D": result})
    defects = leibniz_defects(probe, "zmul", "D")
    if defects:
        (i, j), defect = defects[0]
        raise ModelError(f"extension is not a derivation: defect at "
                         f"({m.basis_labels[i]}, {m.basis_labels[j]}) = {defect}")
    return result


def _word_label(w: tuple) -> str:
    return "".join(f"g{l + 1}" for l in w)


def attach_derivation(m: TableAlgebra, name: str, rows: Sequence[SparseVec],
                      leibniz_over: Iterable[str] = ()) -> TableAlgebra:
    """Copy of the model with a derivation installed; optionally require the
    Leibniz property over the named operations."""
    if len(rows) != m.dim:
        raise ModelError("derivation matrix size does not match dimension")
    out = m.copy_with(dmats={**m.dmats, name: tuple(dict(r) for r in rows)})
    for op in leibniz_over:
        defects = leibniz_defects(out, op, name)
        if defects:
            (i, j), defect = defects[0]
            raise ModelError(f"{name} fails Leibniz over {op} at "
                             f"({m.basis_labels[i]}, {m.basis_labels[j]})")
    return out


# ---------------------------------------------------------------------------
# Small named models


def zero_model(dim: int) -> TableAlgebra:
    """Both operations identically zero; any matrix is a derivation."""
    m = TableAlgebra(dim, {"mul": {}, "br": {}}, {"D": tuple({} for _ in range(dim))},
                     name=f"zero({dim})", meta={"family": "zero"})
    return m


def unital_poisson_model() -> TableAlgebra:
    """Unital three-dimensional model with a nonzero bracket.

    The unit forces the bracket-product compatibility to hold while breaking
    the transposed compatibility, so this is the stock countermodel for
    "compatible implies transposed"."""
    mul = {}
    for i in range(3):
        mul[(0, i)] = {i: 1}
        if i:
            mul[(i, 0)] = {i: 1}
    br = {(1, 2): {1: 1}, (2, 1): {1: -1}}
    m = TableAlgebra(3, {"mul": mul, "br": br},
                     basis_labels=("u", "x", "y"), name="unital-poisson-3",
                     meta={"family": "unital_poisson"})
    return m


def poisson_pool() -> list[TableAlgebra]:
    """Small model pool for countermodel searches over bracket-product varieties."""
    trunc = truncated_poly_model(4)
    trunc0 = trunc.copy_with(tables={**trunc.tables, "br": {}},
                             name=trunc.name + "+0br")
    return [zero_model(2), trunc0, unital_poisson_model()]


# ---------------------------------------------------------------------------
# Randomized commutative associative models with derivation


def _staircase_partitions(total: int, max_rows: int = 4) -> list[tuple[int, ...]]:
    """Weakly decreasing positive compositions of ``total`` (Young diagrams)."""
    out: list[tuple[int, ...]] = []

    def rec(remaining: int, bound: int, acc: tuple[int, ...]):
        if remaining == 0:
            out.append(acc)
            return
        if len(acc) == max_rows:
            return
        for part in range(min(bound, remaining), 0, -1):
            rec(remaining - part, part, acc + (part,))

    rec(total, total, ())
    return out


def _staircase_block(partition: tuple[int, ...], rng: random.Random) -> TableAlgebra:
    """Nonunital monomial algebra: cells of a staircase diagram minus the
    origin, with a derivation sum of c_v x_v^(j_v) d/d x_v, j_v >= 1."""
    cells = [(a, b) for b, width in enumerate(partition) for a in range(width)]
    basis = [c for c in cells if c != (0, 0)]
    basis.sort(key=lambda c: (c[0] + c[1], c))
    index = {c: i for i, c in enumerate(basis)}
    inside = set(cells)
    dim = len(basis)

    table = {}
    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            w = (u[0] + v[0], u[1] + v[1])
            if w in inside:
                table[(i, j)] = {index[w]: 1}

    two_vars = len(partition) > 1
    coeffs = []
    for _ in range(2 if two_vars else 1):
        c = rng.choice([0, 1, 1, -1, 2, Fraction(1, 2)])
        jexp = rng.choice([1, 1, 2])
        coeffs.append((c, jexp))
    rows = []
    for u in basis:
        img: SparseVec = {}
        for axis, (c, jexp) in enumerate(coeffs):
            deg = u[axis]
            if c == 0 or deg == 0:
                continue
            shifted = list(u)
            shifted[axis] += jexp - 1
            w = tuple(shifted)
            if w in inside and w != (0, 0):
                sparse_add_scaled(img, {index[w]: 1}, c * deg)
        rows.append(img)
    labels = []
    for (a, b) in basis:
        part = []
        if a:
            part.append("x" if a == 1 else f"x^{a}")
        if b:
            part.append("y" if b == 1 else f"y^{b}")
        labels.append("*".join(part))
    return TableAlgebra(dim, {"mul": table}, {"D": tuple(rows)},
                        basis_labels=tuple(labels), name=f"staircase{partition}")


def _null_block(dim: int, rng: random.Random, sparsity: float) -> TableAlgebra:
    rows = []
    for _ in range(dim):
        img: SparseVec = {}
        for j in range(dim):
            if rng.random() > sparsity:
                c = rng.choice([1, -1, 2, Fraction(1, 2), Fraction(-1, 3)])
                img[j] = _scale(Fraction(c))
        rows.append(img)
    return TableAlgebra(dim, {"mul": {}}, {"D": tuple(rows)}, name=f"null({dim})")


def _direct_sum(a: TableAlgebra, b: TableAlgebra) -> TableAlgebra:
    dim = a.dim + b.dim
    table = {}
    for (i, j), v in a.tables["mul"].items():
        table[(i, j)] = dict(v)
    for (i, j), v in b.tables["mul"].items():
        table[(i + a.dim, j + a.dim)] = {k + a.dim: c for k, c in v.items()}
    rows = [dict(r) for r in a.dmats["D"]]
    rows += [{k + a.dim: c for k, c in r.items()} for r in b.dmats["D"]]
    return TableAlgebra(dim, {"mul": table}, {"D": tuple(rows)},
                        basis_labels=a.basis_labels + b.basis_labels,
                        name=f"{a.name}(+){b.name}")


def _rescale(m: TableAlgebra, rng: random.Random) -> TableAlgebra:
    scales = [rng.choice([1, 1, 2, -1, Fraction(1, 2), 3]) for _ in range(m.dim)]
    scales = [Fraction(s) for s in scales]
    table = {}
    for (i, j), v in m.tables["mul"].items():
        table[(i, j)] = {k: _scale(c * scales[i] * scales[j] / scales[k])
                         for k, c in v.items()}
    rows = []
    for i, r in enumerate(m.dmats["D"]):
        rows.append({k: _scale(c * scales[i] / scales[k]) for k, c in r.items()})
    return TableAlgebra(m.dim, {"mul": table}, {"D": tuple(rows)},
                        basis_labels=m.basis_labels, name=m.name + "~")


def random_commassoc_der(dim: int, sparsity: float = 0.5, seed: int = 0,
                         cap: int = 8) -> TableAlgebra:
    """Seeded commutative associative algebra with derivation, correct by
    construction: direct sums of staircase-quotient blocks and null blocks
    with random derivations, optionally rescaled."""
    if dim < 1 or dim > cap:
        raise ModelError(f"dimension must be between 1 and {cap}")
    rng = random.Random(f"gpforge-commassoc-{dim}-{sparsity}-{seed}")

    blocks: list[TableAlgebra] = []
    remaining = dim
    while remaining:
        size = rng.randint(1, remaining)
        if rng.random() < 0.4:
            blocks.append(_null_block(size, rng, sparsity))
        else:
            partition = rng.choice(_staircase_partitions(size + 1))
            blocks.append(_staircase_block(partition, rng))
        remaining -= size

    model = blocks[0]
    for b in blocks[1:]:
        model = _direct_sum(model, b)
    if rng.random() < 0.5:
        model = _rescale(model, rng)
    model.name = f"random-commassoc(dim={dim},seed={seed})"

    report = check_axioms(model, builtin("CommAssoc").with_derivation())
    if not report.passed:
        raise AssertionError(f"internal error: generated model failed certification: "
                             f"{report.failure}")
    return model


# ---------------------------------------------------------------------------
# Countermodel search


@dataclass(frozen=True)
class Countermodel:
    model: TableAlgebra
    indices: tuple[int, ...]
    value: tuple[Fraction, ...]


def find_countermodel(v: Variety, target: Poly, pool: Sequence[TableAlgebra]) -> Countermodel | None:
    """First pool model and basis tuple with a nonzero value of the target.

    Every pool model must certify for the variety; anything else would make
    the search meaningless."""
    if target.is_zero():
        return None
    nvars = max((max(term_variables(m.term)) for m in target.monomials), default=0)
    for m in pool:
        if v.name not in m.certified:
            report = check_axioms(m, v)
            if not report.passed:
                raise ModelError(f"pool model {m.name or '?'} is not a {v.name} algebra: "
                                 f"{report.failure.describe(m)}")
        hit = _check_poly_on_basis(m, target, nvars, v.sig.derivations)
        if hit is not None:
            idx, val = hit
            return Countermodel(m, idx, to_dense(val, m.dim))
    return None


# ---------------------------------------------------------------------------
# Serialization


def _frac_text(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def model_to_obj(m: TableAlgebra) -> dict:
    ops = {}
    for op, table in sorted(m.tables.items()):
        dense = [[["0"] * m.dim for _ in range(m.dim)] for _ in range(m.dim)]
        for (i, j), v in table.items():
            for k, c in v.items():
                dense[i][j][k] = _frac_text(c)
        ops[op] = dense
    ders = {}
    for name, rows in sorted(m.dmats.items()):
        ders[name] = [[_frac_text(r.get(k, 0)) for k in range(m.dim)] for r in rows]
    return {
        "name": m.name,
        "dim": m.dim,
        "basis": list(m.basis_labels),
        "ops": ops,
        "derivations": ders,
        "certified": sorted(m.certified),
    }


def model_from_obj(obj: Mapping) -> TableAlgebra:
    dim = int(obj["dim"])
    tables = {}
    for op, dense in obj["ops"].items():
        table = {}
        for i in range(dim):
            for j in range(dim):
                entry = {k: _scale(Fraction(dense[i][j][k]))
                         for k in range(dim) if Fraction(dense[i][j][k]) != 0}
                if entry:
                    table[(i, j)] = entry
        tables[op] = table
    dmats = {}
    for name, rows in obj.get("derivations", {}).items():
        dmats[name] = tuple(
            {k: _scale(Fraction(row[k])) for k in range(dim) if Fraction(row[k]) != 0}
            for row in rows)
    return TableAlgebra(dim, tables, dmats,
                        certified=set(obj.get("certified", ())),
                        basis_labels=tuple(obj.get("basis", ())),
                        name=obj.get("name", ""))
