"""Script language for varieties, models, and queries.

Grammar (statements end with ';', '#' starts a comment):

    variety NAME { op NAME : ARITY [commutative|anticommutative|plain] ;
                   der NAME ;
                   axiom NAME : EXPR = EXPR ; }
    variety NAME = builtin(BUILTIN);
    model NAME = CONSTRUCTOR(key: value, ...);
    query derive EXPR in VARIETY [degree N] [weight W];
    query cert EXPR in VARIETY : [RAT *] AXIOM(EXPR, ...) [ctx EXPR] [dapply K] {+|- ...};
    query verify "FILE.json" in VARIETY;
    query equivalent V1 V2 [degree N] [weight W];
    query model-check MODEL against VARIETY;
    query countermodel EXPR in VARIETY [among M1, M2, ...];
    query polarize EXPR;
    query depolarize EXPR;
    query ito MODEL [mode coordinate|random];

Expressions are prefix applications over the ambient variety's operations
with rational coefficients; operation and derivation declarations must
precede the axioms that use them.  Parsing resolves every name eagerly, so
errors carry source positions; the pretty-printer emits canonical text that
reparses to an equal script.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import engine, exprs, ito as ito_mod, models as models_mod, transforms
from .engine import Certificate, CertificatePart, NotInSlice
from .exprs import ParseError, Token, TokenStream, VarNamer, tokenize
from .models import ModelError, TableAlgebra
from .terms import (
    ANTISYMMETRIC,
    PLAIN,
    SYMMETRIC,
    Operation,
    OperationSignature,
    Poly,
    TermError,
)
from .varieties import SIG_POLAR, SIG_STAR, SIG_ZINBIEL, BUILTIN_NAMES, Variety, builtin

_SYMMETRY_WORDS = {"commutative": SYMMETRIC, "anticommutative": ANTISYMMETRIC, "plain": PLAIN}
_SYMMETRY_NAMES = {v: k for k, v in _SYMMETRY_WORDS.items()}


@dataclass(frozen=True)
class VarietyStmt:
    name: str
    variety: Variety
    builtin_ref: str | None = None


@dataclass(frozen=True)
class ModelStmt:
    name: str
    ctor: str
    args: tuple[tuple[str, object], ...]   # values: int | Fraction | str | Poly-map tuples


@dataclass(frozen=True)
class QueryDerive:
    target: Poly
    variety: str
    degree: int | None = None
    weight: int | None = None


@dataclass(frozen=True)
class QueryCert:
    target: Poly
    variety: str
    parts: tuple[CertificatePart, ...]


@dataclass(frozen=True)
class QueryVerify:
    path: str
    variety: str


@dataclass(frozen=True)
class QueryEquivalent:
    first: str
    second: str
    degree: int | None = None
    weight: int | None = None


@dataclass(frozen=True)
class QueryModelCheck:
    model: str
    variety: str


@dataclass(frozen=True)
class QueryCountermodel:
    target: Poly
    variety: str
    pool: tuple[str, ...] = ()


@dataclass(frozen=True)
class QueryPolarize:
    expr: Poly


@dataclass(frozen=True)
class QueryDepolarize:
    expr: Poly


@dataclass(frozen=True)
class QueryIto:
    model: str
    mode: str | None = None


Query = (QueryDerive, QueryCert, QueryVerify, QueryEquivalent, QueryModelCheck,
         QueryCountermodel, QueryPolarize, QueryDepolarize, QueryIto)


@dataclass(frozen=True)
class Script:
    statements: tuple


# ---------------------------------------------------------------------------
# Parsing


class _Parser:
    def __init__(self, source: str):
        self.ts = TokenStream(tokenize(source))
        self.varieties: dict[str, Variety] = {}
        self.models: set[str] = set()

    def parse(self) -> Script:
        statements = []
        while self.ts.peek().kind != "eof":
            statements.append(self._statement())
        return Script(tuple(statements))

    def _statement(self):
        tok = self.ts.expect_ident("statement keyword")
        if tok.text == "variety":
            return self._variety()
        if tok.text == "model":
            return self._model()
        if tok.text == "query":
            return self._query()
        raise ParseError(f"unknown statement {tok.text!r} "
                         "(expected variety, model, or query)", tok.line, tok.col)

    # -- varieties ---------------------------------------------------------

    def _variety(self) -> VarietyStmt:
        name_tok = self.ts.expect_ident("variety name")
        name = name_tok.text
        if self.ts.accept_sym("="):
            kw = self.ts.expect_ident()
            if kw.text != "builtin":
                raise ParseError("expected builtin(...)", kw.line, kw.col)
            self.ts.expect_sym("(")
            bname = self._hyphen_name()
            self.ts.expect_sym(")")
            self.ts.expect_sym(";")
            v = builtin(bname)
            stmt = VarietyStmt(name, Variety(name, v.sig, v.axioms), bname)
        else:
            self.ts.expect_sym("{")
            ops: list[Operation] = []
            ders: list[str] = []
            axioms: list[tuple[str, Poly]] = []
            sig: OperationSignature | None = None
            while not self.ts.accept_sym("}"):
                item = self.ts.expect_ident("op, der, or axiom")
                if item.text == "op":
                    if axioms:
                        raise ParseError("operation declarations must precede axioms",
                                         item.line, item.col)
                    op_name = self.ts.expect_ident("operation name").text
                    self.ts.expect_sym(":")
                    arity_tok = self.ts.peek()
                    if arity_tok.kind != "int":
                        self.ts.error("expected arity")
                    self.ts.next()
                    arity = int(arity_tok.text)
                    symmetry = PLAIN
                    if self.ts.peek().kind == "ident" and self.ts.peek().text in _SYMMETRY_WORDS:
                        symmetry = _SYMMETRY_WORDS[self.ts.next().text]
                    self.ts.expect_sym(";")
                    ops.append(Operation(op_name, arity, symmetry))
                elif item.text == "der":
                    if axioms:
                        raise ParseError("derivation declarations must precede axioms",
                                         item.line, item.col)
                    ders.append(self.ts.expect_ident("derivation name").text)
                    self.ts.expect_sym(";")
                elif item.text == "axiom":
                    if sig is None:
                        try:
                            sig = OperationSignature(tuple(ops), tuple(ders))
                        except TermError as e:
                            raise ParseError(str(e), item.line, item.col) from None
                    ax_name = self.ts.expect_ident("axiom name").text
                    self.ts.expect_sym(":")
                    namer = VarNamer()
                    lhs = exprs.parse_expr_tokens(self.ts, sig, namer)
                    self.ts.expect_sym("=")
                    rhs = exprs.parse_expr_tokens(self.ts, sig, namer)
                    self.ts.expect_sym(";")
                    axioms.append((ax_name, lhs - rhs))
                else:
                    raise ParseError(f"unknown variety item {item.text!r}",
                                     item.line, item.col)
            if sig is None:
                sig = OperationSignature(tuple(ops), tuple(ders))
            try:
                stmt = VarietyStmt(name, Variety(name, sig, tuple(axioms)))
            except TermError as e:
                raise ParseError(str(e), name_tok.line, name_tok.col) from None
        self.varieties[name] = stmt.variety
        return stmt

    def _hyphen_name(self) -> str:
        pieces = [self.ts.expect_ident("name").text]
        while self.ts.accept_sym("-"):
            pieces.append(self.ts.expect_ident("name").text)
        return "-".join(pieces)

    # -- models ------------------------------------------------------------

    def _model(self) -> ModelStmt:
        name = self.ts.expect_ident("model name").text
        self.ts.expect_sym("=")
        ctor_tok = self.ts.expect_ident("constructor")
        ctor = ctor_tok.text
        self.ts.expect_sym("(")
        args: list[tuple[str, object]] = []
        if not self.ts.at_sym(")"):
            while True:
                args.append(self._model_arg())
                if not self.ts.accept_sym(","):
                    break
        self.ts.expect_sym(")")
        self.ts.expect_sym(";")
        for key, value in args:
            if key == "" and isinstance(value, str) and value not in self.models:
                tok = ctor_tok
                raise ParseError(f"model {value!r} is not declared", tok.line, tok.col)
        self.models.add(name)
        return ModelStmt(name, ctor, tuple(args))

    def _model_arg(self) -> tuple[str, object]:
        tok = self.ts.peek()
        if tok.kind == "ident":
            mark = self.ts.pos
            ident = self.ts.next().text
            if self.ts.accept_sym(":"):
                return ident, self._model_value()
            self.ts.pos = mark
        return "", self._model_value()

    def _model_value(self):
        tok = self.ts.peek()
        if tok.kind == "int":
            return exprs._parse_rational(self.ts)
        if tok.kind == "sym" and tok.text == "-":
            self.ts.next()
            val = self._model_value()
            if isinstance(val, (int, Fraction)):
                return -val
            self.ts.error("cannot negate this argument")
        if tok.kind == "sym" and tok.text == "{":
            self.ts.next()
            entries = []
            if not self.ts.at_sym("}"):
                while True:
                    key = self.ts.expect_ident("generator name").text
                    self.ts.expect_sym(":")
                    namer = VarNamer()
                    poly = exprs.parse_expr_tokens(self.ts, SIG_ZINBIEL, namer)
                    by_index = tuple(name for name, _ in
                                     sorted(namer.names.items(), key=lambda kv: kv[1]))
                    entries.append((key, poly, by_index))
                    if not self.ts.accept_sym(","):
                        break
            self.ts.expect_sym("}")
            return ("map", tuple(entries))
        if tok.kind == "ident":
            ident = self.ts.next().text
            if self.ts.at_sym("("):
                self.ts.next()
                inner = self.ts.peek()
                if inner.kind != "int":
                    self.ts.error("expected an integer argument")
                self.ts.next()
                self.ts.expect_sym(")")
                return ("call", ident, int(inner.text))
            if ident in ("true", "false"):
                return ident == "true"
            return ident
        self.ts.error("expected a constructor argument")

    # -- queries -----------------------------------------------------------

    def _query(self):
        kind_tok = self.ts.expect_ident("query kind")
        kind = kind_tok.text
        if kind == "model" and self.ts.accept_sym("-"):
            suffix = self.ts.expect_ident()
            kind = f"model-{suffix.text}"
        handler = {
            "derive": self._q_derive,
            "cert": self._q_cert,
            "verify": self._q_verify,
            "equivalent": self._q_equivalent,
            "model-check": self._q_model_check,
            "countermodel": self._q_countermodel,
            "polarize": self._q_polarize,
            "depolarize": self._q_depolarize,
            "ito": self._q_ito,
        }.get(kind)
        if handler is None:
            raise ParseError(f"unknown query kind {kind!r}", kind_tok.line, kind_tok.col)
        stmt = handler()
        self.ts.expect_sym(";")
        return stmt

    def _variety_ref(self) -> tuple[str, Variety]:
        tok = self.ts.expect_ident("variety name")
        v = self.varieties.get(tok.text)
        if v is None:
            raise ParseError(f"variety {tok.text!r} is not declared", tok.line, tok.col)
        return tok.text, v

    def _model_ref(self) -> str:
        tok = self.ts.expect_ident("model name")
        if tok.text not in self.models:
            raise ParseError(f"model {tok.text!r} is not declared", tok.line, tok.col)
        return tok.text

    def _slice_params(self) -> tuple[int | None, int | None]:
        degree = weight = None
        while self.ts.peek().kind == "ident" and self.ts.peek().text in ("degree", "weight"):
            which = self.ts.next().text
            tok = self.ts.peek()
            if tok.kind != "int":
                self.ts.error(f"expected an integer after {which!r}")
            self.ts.next()
            if which == "degree":
                degree = int(tok.text)
            else:
                weight = int(tok.text)
        return degree, weight

    def _q_derive(self) -> QueryDerive:
        # target expression is parsed against the named variety's signature,
        # so scan ahead for "in NAME" by parsing lazily: require the variety
        # name after the expression.  We parse the expression with a deferred
        # signature by first locating the variety.
        mark = self.ts.pos
        depth = 0
        while True:
            tok = self.ts.peek()
            if tok.kind == "eof":
                self.ts.error("expected 'in VARIETY' after the expression")
            if tok.kind == "sym" and tok.text == "(":
                depth += 1
            elif tok.kind == "sym" and tok.text == ")":
                depth -= 1
            elif tok.kind == "ident" and tok.text == "in" and depth == 0:
                break
            self.ts.next()
        self.ts.next()  # 'in'
        vname, v = self._variety_ref()
        end = self.ts.pos
        self.ts.pos = mark
        target = exprs.parse_expr_tokens(self.ts, v.sig, VarNamer())
        if self.ts.pos != end - 2:
            tok = self.ts.peek()
            raise ParseError("unexpected input after the expression", tok.line, tok.col)
        self.ts.pos = end
        degree, weight = self._slice_params()
        return QueryDerive(target, vname, degree, weight)

    def _q_cert(self) -> QueryCert:
        q = self._q_derive_like()
        target, vname, v = q
        self.ts.expect_sym(":")
        parts = [self._cert_part(v, Fraction(1))]
        while self.ts.peek().kind == "sym" and self.ts.peek().text in "+-":
            sign = Fraction(1) if self.ts.next().text == "+" else Fraction(-1)
            parts.append(self._cert_part(v, sign))
        return QueryCert(target, vname, tuple(parts))

    def _q_derive_like(self):
        d = self._q_derive()
        return d.target, d.variety, self.varieties[d.variety]

    def _cert_part(self, v: Variety, sign: Fraction) -> CertificatePart:
        coeff = sign
        tok = self.ts.peek()
        if tok.kind == "int":
            coeff = sign * exprs._parse_rational(self.ts)
            self.ts.expect_sym("*")
        ax_tok = self.ts.expect_ident("axiom name")
        if ax_tok.text not in v.axiom_names():
            raise ParseError(f"variety {v.name!r} has no axiom {ax_tok.text!r}",
                             ax_tok.line, ax_tok.col)
        self.ts.expect_sym("(")
        images = []
        namer = VarNamer()
        while True:
            poly = exprs.parse_expr_tokens(self.ts, v.sig, namer)
            if len(poly.monomials) != 1 or poly.monomials[0].coeff != 1:
                self.ts.error("substitution images must be single plain terms")
            images.append(poly.monomials[0].term)
            if not self.ts.accept_sym(","):
                break
        self.ts.expect_sym(")")
        context = None
        dshift = 0
        while self.ts.peek().kind == "ident" and self.ts.peek().text in ("ctx", "dapply"):
            which = self.ts.next().text
            if which == "ctx":
                poly = exprs.parse_expr_tokens(self.ts, v.sig, namer, allow_hole=True)
                if len(poly.monomials) != 1 or poly.monomials[0].coeff != 1:
                    self.ts.error("contexts must be single plain terms")
                context = poly.monomials[0].term
            else:
                tok = self.ts.peek()
                if tok.kind != "int":
                    self.ts.error("expected an integer after 'dapply'")
                self.ts.next()
                dshift = int(tok.text)
        sigma = tuple((i + 1, t) for i, t in enumerate(images))
        return CertificatePart(coeff, ax_tok.text, sigma, context, dshift)

    def _q_verify(self) -> QueryVerify:
        tok = self.ts.peek()
        if tok.kind != "string":
            self.ts.error("expected a quoted certificate file path")
        self.ts.next()
        kw = self.ts.expect_ident()
        if kw.text != "in":
            raise ParseError("expected 'in VARIETY'", kw.line, kw.col)
        vname, _ = self._variety_ref()
        return QueryVerify(tok.text[1:-1], vname)

    def _q_equivalent(self) -> QueryEquivalent:
        first, _ = self._variety_ref()
        second, _ = self._variety_ref()
        degree, weight = self._slice_params()
        return QueryEquivalent(first, second, degree, weight)

    def _q_model_check(self) -> QueryModelCheck:
        mname = self._model_ref()
        kw = self.ts.expect_ident()
        if kw.text != "against":
            raise ParseError("expected 'against VARIETY'", kw.line, kw.col)
        vname, _ = self._variety_ref()
        return QueryModelCheck(mname, vname)

    def _q_countermodel(self) -> QueryCountermodel:
        d = self._q_derive()
        pool: list[str] = []
        if self.ts.peek().kind == "ident" and self.ts.peek().text == "among":
            self.ts.next()
            pool.append(self._model_ref())
            while self.ts.accept_sym(","):
                pool.append(self._model_ref())
        return QueryCountermodel(d.target, d.variety, tuple(pool))

    def _q_polarize(self) -> QueryPolarize:
        return QueryPolarize(exprs.parse_expr_tokens(self.ts, SIG_STAR, VarNamer()))

    def _q_depolarize(self) -> QueryDepolarize:
        return QueryDepolarize(exprs.parse_expr_tokens(self.ts, SIG_POLAR, VarNamer()))

    def _q_ito(self) -> QueryIto:
        mname = self._model_ref()
        mode = None
        if self.ts.peek().kind == "ident" and self.ts.peek().text == "mode":
            self.ts.next()
            mode_tok = self.ts.expect_ident("coordinate or random")
            if mode_tok.text not in ("coordinate", "random"):
                raise ParseError(f"unknown mode {mode_tok.text!r}", mode_tok.line, mode_tok.col)
            mode = mode_tok.text
        return QueryIto(mname, mode)


def parse_script(source: str) -> Script:
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Pretty-printing


def print_script(script: Script) -> str:
    env: dict[str, Variety] = {}
    lines: list[str] = []
    for stmt in script.statements:
        lines.append(_print_statement(stmt, env))
    return "\n".join(lines) + "\n"


def _print_statement(stmt, env: dict[str, Variety]) -> str:
    if isinstance(stmt, VarietyStmt):
        env[stmt.name] = stmt.variety
        if stmt.builtin_ref:
            return f"variety {stmt.name} = builtin({stmt.builtin_ref});"
        v = stmt.variety
        body = []
        for op in v.sig.ops:
            sym = f" {_SYMMETRY_NAMES[op.symmetry]}" if op.arity == 2 and op.symmetry != PLAIN else ""
            body.append(f"  op {op.name} : {op.arity}{sym};")
        for d in v.sig.derivations:
            body.append(f"  der {d};")
        for name, p in v.axioms:
            body.append(f"  axiom {name} : {exprs.poly_to_text(p, v.sig)} = 0;")
        return f"variety {stmt.name} {{\n" + "\n".join(body) + "\n}"
    if isinstance(stmt, ModelStmt):
        args = []
        for key, value in stmt.args:
            text = _print_model_value(value)
            args.append(f"{key}: {text}" if key else text)
        return f"model {stmt.name} = {stmt.ctor}({', '.join(args)});"
    env_sig = lambda name: env[name].sig
    if isinstance(stmt, QueryDerive):
        extra = _print_slice(stmt.degree, stmt.weight)
        return (f"query derive {exprs.poly_to_text(stmt.target, env_sig(stmt.variety))} "
                f"in {stmt.variety}{extra};")
    if isinstance(stmt, QueryCert):
        sig = env_sig(stmt.variety)
        chunks = []
        for i, part in enumerate(stmt.parts):
            sign = "-" if part.coeff < 0 else "+"
            mag = abs(part.coeff)
            args = ", ".join(exprs.term_to_text(t, sig) for _, t in part.sigma)
            body = f"{part.axiom}({args})"
            if mag != 1:
                body = f"{exprs.fraction_to_text(mag)} * {body}"
            if part.context is not None:
                body += f" ctx {exprs.term_to_text(part.context, sig)}"
            if part.dshift:
                body += f" dapply {part.dshift}"
            if i == 0:
                chunks.append(body if part.coeff > 0 else f"-{body}")
            else:
                chunks.append(f"{sign} {body}")
        return (f"query cert {exprs.poly_to_text(stmt.target, sig)} in {stmt.variety} : "
                + " ".join(chunks) + ";")
    if isinstance(stmt, QueryVerify):
        return f'query verify "{stmt.path}" in {stmt.variety};'
    if isinstance(stmt, QueryEquivalent):
        extra = _print_slice(stmt.degree, stmt.weight)
        return f"query equivalent {stmt.first} {stmt.second}{extra};"
    if isinstance(stmt, QueryModelCheck):
        return f"query model-check {stmt.model} against {stmt.variety};"
    if isinstance(stmt, QueryCountermodel):
        among = f" among {', '.join(stmt.pool)}" if stmt.pool else ""
        return (f"query countermodel {exprs.poly_to_text(stmt.target, env_sig(stmt.variety))} "
                f"in {stmt.variety}{among};")
    if isinstance(stmt, QueryPolarize):
        return f"query polarize {exprs.poly_to_text(stmt.expr, SIG_STAR)};"
    if isinstance(stmt, QueryDepolarize):
        return f"query depolarize {exprs.poly_to_text(stmt.expr, SIG_POLAR)};"
    if isinstance(stmt, QueryIto):
        mode = f" mode {stmt.mode}" if stmt.mode else ""
        return f"query ito {stmt.model}{mode};"
    raise TypeError(f"unknown statement {stmt!r}")


def _print_model_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, Fraction)):
        return exprs.fraction_to_text(Fraction(value))
    if isinstance(value, str):
        return value
    if isinstance(value, tuple) and value and value[0] == "call":
        return f"{value[1]}({value[2]})"
    if isinstance(value, tuple) and value and value[0] == "map":
        entries = []
        for key, poly, names in value[1]:
            entries.append(f"{key}: {_poly_with_names(poly, names)}")
        return "{" + ", ".join(entries) + "}"
    raise TypeError(f"unknown model argument {value!r}")


def _poly_with_names(poly: Poly, names: tuple[str, ...]) -> str:
    text = exprs.poly_to_text(poly, SIG_ZINBIEL)
    for idx, name in enumerate(sorted(names), start=1):
        text = text.replace(f"x{idx}", name)
    return text


def _print_slice(degree, weight) -> str:
    out = ""
    if degree is not None:
        out += f" degree {degree}"
    if weight is not None:
        out += f" weight {weight}"
    return out


# ---------------------------------------------------------------------------
# Execution


@dataclass
class RunFlags:
    degree: int = 3
    weight: int = 1
    seed: int = 0
    cap: int = 50_000
    noncommutative: bool = False
    base_dir: Path = field(default_factory=Path.cwd)


def _frac(c) -> str:
    return exprs.fraction_to_text(Fraction(c))


class Runner:
    def __init__(self, script: Script, flags: RunFlags | None = None):
        self.script = script
        self.flags = flags or RunFlags()
        self.varieties: dict[str, Variety] = {}
        self.models: dict[str, TableAlgebra] = {}
        self.records: list[dict] = []
        self.lines: list[str] = []

    def run(self) -> int:
        ok = True
        for index, stmt in enumerate(self.script.statements):
            if isinstance(stmt, VarietyStmt):
                self.varieties[stmt.name] = stmt.variety
                self._say(f"variety {stmt.name}: "
                          f"{len(stmt.variety.axioms)} axiom(s)")
                continue
            if isinstance(stmt, ModelStmt):
                model = self._instantiate(stmt)
                self.models[stmt.name] = model
                self._say(f"model {stmt.name}: dim {model.dim} ({model.name})")
                continue
            record = self._run_query(index, stmt)
            self.records.append(record)
            ok = ok and record["verdict"]
        return 0 if ok else 1

    def report_obj(self) -> dict:
        return {
            "flags": {
                "degree": self.flags.degree,
                "weight": self.flags.weight,
                "seed": self.flags.seed,
                "cap": self.flags.cap,
                "noncommutative": self.flags.noncommutative,
            },
            "queries": self.records,
        }

    def report_json(self) -> str:
        return json.dumps(self.report_obj(), sort_keys=True, indent=2) + "\n"

    def _say(self, line: str) -> None:
        self.lines.append(line)

    # -- models ------------------------------------------------------------

    def _instantiate(self, stmt: ModelStmt) -> TableAlgebra:
        kwargs = {}
        positional = []
        for key, value in stmt.args:
            if key:
                kwargs[key] = value
            else:
                positional.append(value)

        def model_arg(value) -> TableAlgebra:
            if not isinstance(value, str) or value not in self.models:
                raise ModelError(f"expected a declared model name, got {value!r}")
            return self.models[value]

        c = stmt.ctor
        if c == "truncated_poly":
            der = kwargs.get("der", "euler")
            if isinstance(der, tuple) and der[0] == "call" and der[1] == "monomial":
                der = der[2]
            return models_mod.truncated_poly_model(int(kwargs["order"]), der)
        if c == "integral_zinbiel":
            return models_mod.integral_zinbiel_model(
                int(kwargs["order"]),
                constants=bool(kwargs.get("constants", True)),
                with_ddx=bool(kwargs.get("ddx", kwargs.get("constants", True))))
        if c == "free_zinbiel":
            m = models_mod.free_zinbiel_model(int(kwargs["generators"]), int(kwargs["cap"]))
            der = kwargs.get("der")
            if der is not None:
                if not (isinstance(der, tuple) and der[0] == "map"):
                    raise ModelError("free_zinbiel der must be {g1: expr, ...}")
                images = {}
                gens = int(kwargs["generators"])
                for key, poly, names in der[1]:
                    if not key.startswith("g"):
                        raise ModelError(f"generator keys look like g1, g2, ...; got {key!r}")
                    target = int(key[1:])
                    assignment = []
                    for nm in names:  # names are in variable-index order
                        if not nm.startswith("g"):
                            raise ModelError(f"image expressions use generators g1..g{gens}")
                        assignment.append(int(nm[1:]) - 1)
                    value = models_mod.eval_identity(m, poly, assignment)
                    images[target] = {i: c for i, c in enumerate(value) if c}
                rows = models_mod.extend_derivation(m, images)
                m = models_mod.attach_derivation(m, "D", rows, leibniz_over=("zmul",))
            return m
        if c == "random_commassoc":
            return models_mod.random_commassoc_der(
                int(kwargs["dim"]),
                sparsity=float(Fraction(kwargs.get("sparsity", Fraction(1, 2)))),
                seed=int(kwargs.get("seed", self.flags.seed)))
        if c == "zero":
            return models_mod.zero_model(int(kwargs["dim"]))
        if c == "unital_poisson":
            return models_mod.unital_poisson_model()
        if c == "derived_bracket":
            return transforms.derived_bracket(model_arg(positional[0]))
        if c == "zinbiel_star":
            return transforms.zinbiel_star(model_arg(positional[0]))
        if c == "zinbiel_polarization":
            return transforms.zinbiel_polarization(model_arg(positional[0]))
        if c == "depolarize_model":
            return transforms.depolarize_model(model_arg(positional[0]))
        raise ModelError(f"unknown model constructor {stmt.ctor!r}")

    # -- queries -----------------------------------------------------------

    _KIND_NAMES = {
        "QueryDerive": "derive", "QueryCert": "cert", "QueryVerify": "verify",
        "QueryEquivalent": "equivalent", "QueryModelCheck": "model-check",
        "QueryCountermodel": "countermodel", "QueryPolarize": "polarize",
        "QueryDepolarize": "depolarize", "QueryIto": "ito",
    }

    def _run_query(self, index: int, stmt) -> dict:
        record: dict = {"index": index, "kind": self._KIND_NAMES[type(stmt).__name__]}
        try:
            detail, verdict = self._dispatch(stmt)
        except (TermError, ModelError, engine.InstanceCapExceeded) as e:
            record.update({"verdict": False, "error": str(e)})
            self._say(f"query[{index}] error: {e}")
            return record
        record["verdict"] = verdict
        record.update(detail)
        self._say(f"query[{index}] {record['kind']}: {'ok' if verdict else 'FAIL'}")
        return record

    def _dispatch(self, stmt) -> tuple[dict, bool]:
        opts = engine.InstanceOptions(cap=self.flags.cap)
        if isinstance(stmt, QueryDerive):
            v = self.varieties[stmt.variety]
            n = stmt.degree or self.flags.degree
            w = stmt.weight if stmt.weight is not None else self.flags.weight
            result = engine.derive(stmt.target, v, n, w, opts)
            if isinstance(result, Certificate):
                return {"certificate": engine.certificate_to_obj(result, v)}, True
            return {"not_in_slice": {"degree": result.degree, "weight": result.weight,
                                     "instances": result.instance_count}}, False
        if isinstance(stmt, QueryCert):
            v = self.varieties[stmt.variety]
            cert = Certificate(stmt.target, stmt.parts)
            res = engine.verify_certificate(cert, v)
            return {"residual": exprs.poly_to_text(res.residual, v.sig)}, res.ok
        if isinstance(stmt, QueryVerify):
            v = self.varieties[stmt.variety]
            path = self.flags.base_dir / stmt.path
            cert = engine.certificate_from_obj(json.loads(path.read_text()), v)
            res = engine.verify_certificate(cert, v)
            return {"residual": exprs.poly_to_text(res.residual, v.sig)}, res.ok
        if isinstance(stmt, QueryEquivalent):
            a = self.varieties[stmt.first]
            b = self.varieties[stmt.second]
            n = stmt.degree or self.flags.degree
            w = stmt.weight if stmt.weight is not None else self.flags.weight
            fwd = engine.check_implication(a, b, n, w, opts)
            bwd = engine.check_implication(b, a, n, w, opts)
            detail = {"forward": _implication_obj(fwd), "backward": _implication_obj(bwd)}
            return detail, fwd.all_derived and bwd.all_derived
        if isinstance(stmt, QueryModelCheck):
            m = self.models[stmt.model]
            v = self.varieties[stmt.variety]
            report = models_mod.check_axioms(m, v)
            detail = {"model": stmt.model, "variety": stmt.variety}
            if report.failure is not None:
                detail["witness"] = report.failure.describe(m)
            return detail, report.passed
        if isinstance(stmt, QueryCountermodel):
            v = self.varieties[stmt.variety]
            pool = [self.models[name] for name in stmt.pool] or models_mod.poisson_pool()
            hit = models_mod.find_countermodel(v, stmt.target, pool)
            if hit is None:
                return {"countermodel": None}, False
            return {"countermodel": {
                "model": hit.model.name,
                "tuple": [hit.model.basis_labels[i] for i in hit.indices],
                "value": [_frac(c) for c in hit.value],
            }}, True
        if isinstance(stmt, QueryPolarize):
            out = transforms.polarize(stmt.expr)
            return {"result": exprs.poly_to_text(out, SIG_POLAR)}, True
        if isinstance(stmt, QueryDepolarize):
            out = transforms.depolarize(stmt.expr)
            return {"result": exprs.poly_to_text(out, SIG_STAR)}, True
        if isinstance(stmt, QueryIto):
            m = self.models[stmt.model]
            report = ito_mod.run_ito(m, mode=stmt.mode or "coordinate",
                                     seed=self.flags.seed,
                                     noncommutative=self.flags.noncommutative)
            detail = {
                "model": stmt.model,
                "noncommutative": report.noncommutative,
                "decompositions": report.decompositions,
                "metatrivial": None if report.metatrivial is None else report.metatrivial.passed,
                "violations": list(report.violations),
            }
            return detail, report.passed
        raise TypeError(f"unknown query {stmt!r}")


def _implication_obj(report: engine.ImplicationReport) -> dict:
    entries = {}
    for e in report.entries:
        if isinstance(e.certificate, Certificate):
            entries[e.axiom] = {"derived": True, "parts": len(e.certificate.parts)}
        else:
            entries[e.axiom] = {"derived": False,
                                "instances": e.certificate.instance_count}
    return {"from": report.source, "to": report.goal, "axioms": entries}


def run_text(source: str, flags: RunFlags | None = None) -> tuple[int, Runner]:
    script = parse_script(source)
    runner = Runner(script, flags)
    code = runner.run()
    return code, runner
