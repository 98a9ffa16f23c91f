"""Consequence engine: slice generation, certificate checking, derivation.

The degree-n, weight-W slice of a variety's differential T-ideal is spanned
by axiom instances: substitute multilinear monomials (optionally carrying
derivation powers) for the axiom's variables, optionally embed the result in
a one-hole multilinear context, optionally apply the derivation to the whole
instance.  A certificate is an explicit rational combination of such
instances equal to a target polynomial; verification is exact, and discovery
is a linear solve over the slice basis.

A failed derivation only means the target is outside the requested slice
span; refutation is the model module's job.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import exprs
from .linalg import solve_combination
from .terms import (
    HOLE,
    Apply,
    BasisCapExceeded,
    Monomial,
    Poly,
    Rational,
    SliceBasis,
    Term,
    TermError,
    Var,
    d_apply,
    embed,
    enumerate_basis,
    is_multilinear,
    multilinear_terms,
    poly_degree,
    poly_max_weight,
    poly_min_weight,
    poly_of,
    substitute,
    term_key,
    to_vector,
)
from .varieties import Variety


class InstanceCapExceeded(RuntimeError):
    """Instance generation exceeded the configured cap."""


@dataclass(frozen=True)
class InstanceOptions:
    """What counts as an axiom instance when spanning a slice."""

    monomial_images: bool = True   # substitute composite monomials, not just variables
    image_weights: bool = True     # images may carry derivation powers
    contexts: bool = True          # embed instances in one-hole contexts
    dshifts: bool = True           # apply the derivation to whole instances
    cap: int = 50_000


DEFAULT_OPTIONS = InstanceOptions()


@dataclass(frozen=True)
class CertificatePart:
    coeff: Fraction
    axiom: str
    sigma: tuple[tuple[int, Term], ...]   # axiom variable -> image term
    context: Term | None = None           # one-hole term (hole = variable 0)
    dshift: int = 0

    def substitution(self) -> dict[int, Term]:
        return dict(self.sigma)


@dataclass(frozen=True)
class Certificate:
    """A claimed equality: sum of instance parts equals the target."""

    target: Poly
    parts: tuple[CertificatePart, ...]


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    residual: Poly


@dataclass(frozen=True)
class LabeledInstance:
    label: str
    axiom: str
    sigma: tuple[tuple[int, Term], ...]
    context: Term | None
    dshift: int
    poly: Poly


@dataclass(frozen=True)
class NotInSlice:
    """Inconclusive outcome: the target is not in the generated slice span."""

    degree: int
    weight: int
    instance_count: int


def part_poly(part: CertificatePart, v: Variety) -> Poly:
    """The polynomial contributed by one certificate part (without its coefficient)."""
    ax = v.axiom(part.axiom)
    inst = substitute(ax, {i: poly_of(t) for i, t in part.sigma}, v.sig)
    if part.context is not None:
        inst = embed(part.context, inst, v.sig)
    if part.dshift:
        inst = d_apply(inst, part.dshift, v.sig)
    return inst


def verify_certificate(cert: Certificate, v: Variety) -> VerifyResult:
    """Check that the certificate's combination equals its target exactly."""
    acc = Poly()
    for part in cert.parts:
        contribution = part_poly(part, v)
        if not is_multilinear(contribution):
            raise TermError(f"certificate part for axiom {part.axiom!r} "
                            "yields a non-multilinear instance")
        acc = acc + contribution * part.coeff
    residual = acc - cert.target
    return VerifyResult(residual.is_zero(), residual)


# ---------------------------------------------------------------------------
# Instance generation


def _var_distributions(n: int, d: int, allow_context: bool, allow_monomials: bool):
    """Yield (blocks, ctx_vars): blocks[i] is the variable set substituted for
    axiom variable i+1; ctx_vars feed the one-hole context."""
    labels = range(d + 1) if allow_context else range(1, d + 1)
    for assignment in itertools.product(labels, repeat=n):
        blocks = [tuple(v for v in range(1, n + 1) if assignment[v - 1] == slot)
                  for slot in range(1, d + 1)]
        if any(not b for b in blocks):
            continue
        if not allow_monomials and any(len(b) != 1 for b in blocks):
            continue
        ctx = tuple(v for v in range(1, n + 1) if assignment[v - 1] == 0)
        yield blocks, ctx


def instances(v: Variety, n: int, W: int,
              options: InstanceOptions = DEFAULT_OPTIONS) -> list[LabeledInstance]:
    """All labeled axiom instances lying inside the degree-n weight<=W slice."""
    sig = v.sig
    image_budget = W if (options.image_weights and sig.derivation) else 0
    out: list[LabeledInstance] = []

    for ax_name, ax in v.axioms:
        d = poly_degree(ax)
        if d == 0 or d > n:
            continue
        for blocks, ctx_vars in _var_distributions(n, d, options.contexts, options.monomial_images):
            image_lists = [multilinear_terms(b, image_budget, sig) for b in blocks]
            if ctx_vars:
                ctx_list = multilinear_terms((0,) + ctx_vars, image_budget, sig, frozen=(0,))
            else:
                ctx_list = [HOLE]
            for images in itertools.product(*image_lists):
                sigma = {i + 1: t for i, t in enumerate(images)}
                base = substitute(ax, {i: poly_of(t) for i, t in sigma.items()}, sig)
                for ctx in ctx_list:
                    inst = base if ctx == HOLE else embed(ctx, base, sig)
                    if inst.is_zero() or poly_max_weight(inst) > W:
                        continue
                    max_shift = (W - poly_min_weight(inst)) if options.dshifts else 0
                    for k in range(0, max_shift + 1):
                        shifted = d_apply(inst, k, sig) if k else inst
                        if shifted.is_zero() or poly_max_weight(shifted) > W:
                            continue
                        out.append(LabeledInstance(
                            _label(sig, ax_name, sigma, ctx, k),
                            ax_name, tuple(sorted(sigma.items())),
                            None if ctx == HOLE else ctx, k, shifted))
                        if len(out) > options.cap:
                            raise InstanceCapExceeded(
                                f"more than {options.cap} instances at degree {n}, weight {W}")
    return out


def _label(sig, ax_name: str, sigma: Mapping[int, Term], ctx: Term, k: int) -> str:
    args = ", ".join(exprs.term_to_text(sigma[i], sig) for i in sorted(sigma))
    label = f"{ax_name}({args})"
    if ctx != HOLE:
        label += f" ctx {exprs.term_to_text(ctx, sig)}"
    if k:
        label += f" dapply {k}"
    return label


# ---------------------------------------------------------------------------
# Derivation by exact linear algebra


def derive(target: Poly, v: Variety, n: int, W: int,
           options: InstanceOptions = DEFAULT_OPTIONS) -> Certificate | NotInSlice:
    """Express the target as a rational combination of axiom instances.

    Returns a Certificate accepted by ``verify_certificate``, or NotInSlice
    when the target lies outside the span (which is not a refutation)."""
    if not is_multilinear(target, n):
        raise TermError(f"target must be multilinear of degree {n}")
    if poly_max_weight(target) > W:
        raise TermError(f"target weight exceeds the slice bound {W}")

    basis = enumerate_basis(n, W, v.sig)
    insts = instances(v, n, W, options)
    columns = [to_vector(inst.poly, basis) for inst in insts]
    coeffs = solve_combination(columns, to_vector(target, basis))
    if coeffs is None:
        return NotInSlice(n, W, len(insts))

    parts = tuple(
        CertificatePart(c, inst.axiom, inst.sigma, inst.context, inst.dshift)
        for c, inst in zip(coeffs, insts) if c != 0)
    cert = Certificate(target, parts)
    check = verify_certificate(cert, v)
    if not check.ok:
        raise AssertionError("internal error: derived certificate failed verification")
    return cert


@dataclass(frozen=True)
class ImplicationEntry:
    axiom: str
    certificate: Certificate | NotInSlice


@dataclass(frozen=True)
class ImplicationReport:
    source: str
    goal: str
    entries: tuple[ImplicationEntry, ...]

    @property
    def all_derived(self) -> bool:
        return all(isinstance(e.certificate, Certificate) for e in self.entries)


def check_implication(v_from: Variety, v_to: Variety, n: int, W: int,
                      options: InstanceOptions = DEFAULT_OPTIONS) -> ImplicationReport:
    """Try to derive every axiom of ``v_to`` from ``v_from`` in the given slice."""
    entries = []
    for ax_name, ax in v_to.axioms:
        deg = poly_degree(ax)
        if deg > n:
            entries.append(ImplicationEntry(ax_name, NotInSlice(n, W, 0)))
            continue
        entries.append(ImplicationEntry(ax_name, derive(ax, v_from, deg, W, options)))
    return ImplicationReport(v_from.name, v_to.name, tuple(entries))


# ---------------------------------------------------------------------------
# JSON serialization (rationals as "p/q" strings, terms as prefix expressions)


def certificate_to_obj(cert: Certificate, v: Variety) -> dict:
    return {
        "target": exprs.poly_to_text(cert.target, v.sig),
        "parts": [
            {
                "coeff": exprs.fraction_to_text(p.coeff),
                "axiom": p.axiom,
                "sigma": {f"x{i}": exprs.term_to_text(t, v.sig) for i, t in p.sigma},
                "context": None if p.context is None else exprs.term_to_text(p.context, v.sig),
                "dshift": p.dshift,
            }
            for p in cert.parts
        ],
    }


def certificate_from_obj(obj: Mapping, v: Variety) -> Certificate:
    target = exprs.parse_expr(obj["target"], v.sig)
    parts = []
    for p in obj["parts"]:
        sigma = []
        for key, text in p["sigma"].items():
            if not key.startswith("x"):
                raise TermError(f"bad substitution key {key!r}")
            sigma.append((int(key[1:]), exprs.parse_term(text, v.sig)))
        ctx = p.get("context")
        parts.append(CertificatePart(
            exprs.fraction_from_text(p["coeff"]),
            p["axiom"],
            tuple(sorted(sigma)),
            None if ctx is None else exprs.parse_term(ctx, v.sig, allow_hole=True),
            int(p.get("dshift", 0)),
        ))
    return Certificate(target, tuple(parts))
