"""Frontend for the miniature corpus language (.mini files).

Syntax per file:

    type Cache {
      field entries: String;
      def lookup(key: String): String {
        let v = this.entries;
        return v;
      }
    }

Statements: `let x = expr;`, `x = expr;`, `this.f = expr;`, `return expr;`
and bare expression statements. Expressions: identifiers, `this.f`,
`new Type(args)`, string/number literals, and method calls `recv.m(args)`
(a bare `m(args)` calls a method on `this`).

Types that are referenced but never declared (String and friends) are
registered as opaque external types with no members. Calls must resolve to
a declared method; there is no inheritance, so resolution is by the
receiver's static type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import (
    VOID,
    CallEdge,
    DataFlowEdge,
    FieldDecl,
    FlowKind,
    MethodDefinition,
    MethodSignature,
    ProgramModel,
    PmError,
    SourceLocation,
    TypeDecl,
    field_endpoint,
    local_endpoint,
    param_endpoint,
    return_endpoint,
    validate_pm,
)


class CorpusParseError(PmError):
    def __init__(self, message: str, file: str, line: int):
        super().__init__(f"{file}:{line}: {message}")
        self.file = file
        self.line = line


# --- tokens -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}():;,.=])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"type", "field", "def", "let", "return", "new", "this"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | punct | string | number | keyword | eof
    text: str
    line: int


def _tokenize(text: str, filename: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line = 0, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise CorpusParseError(f"unexpected character {text[pos]!r}", filename, line)
        kind = m.lastgroup or ""
        value = m.group()
        if kind not in ("ws", "comment"):
            tk = kind
            if kind == "ident" and value in _KEYWORDS:
                tk = "keyword"
            tokens.append(Token(tk, value, line))
        line += value.count("\n")
        pos = m.end()
    tokens.append(Token("eof", "", line))
    return tokens


# --- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ThisField:
    name: str


@dataclass(frozen=True)
class Literal:
    type_name: str  # String or Int


@dataclass(frozen=True)
class New:
    type_name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Call:
    receiver: "Expr | None"  # None means `this`
    method: str
    args: tuple["Expr", ...]


Expr = Var | ThisField | Literal | New | Call


@dataclass(frozen=True)
class LetStmt:
    name: str
    value: Expr
    line: int


@dataclass(frozen=True)
class AssignStmt:
    target: Var | ThisField
    value: Expr
    line: int


@dataclass(frozen=True)
class ReturnStmt:
    value: Expr
    line: int


@dataclass(frozen=True)
class ExprStmt:
    value: Expr
    line: int


Stmt = LetStmt | AssignStmt | ReturnStmt | ExprStmt


@dataclass(frozen=True)
class FieldAst:
    name: str
    type_name: str


@dataclass(frozen=True)
class MethodAst:
    name: str
    params: tuple[tuple[str, str], ...]  # (name, type)
    return_type: str
    body: tuple[Stmt, ...]
    line_start: int
    line_end: int


@dataclass
class TypeAst:
    name: str
    file: str
    fields: list[FieldAst] = field(default_factory=list)
    methods: list[MethodAst] = field(default_factory=list)


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.file = filename

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str) -> CorpusParseError:
        return CorpusParseError(message, self.file, self.peek().line)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise self.fail(f"expected '{want}', found '{tok.text or tok.kind}'")
        return self.next()

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    def parse_file(self) -> list[TypeAst]:
        types = []
        while self.peek().kind != "eof":
            types.append(self.parse_type())
        return types

    def parse_type(self) -> TypeAst:
        self.expect("keyword", "type")
        name = self.expect("ident").text
        self.expect("punct", "{")
        decl = TypeAst(name=name, file=self.file)
        while not self.accept("punct", "}"):
            if self.accept("keyword", "field"):
                fname = self.expect("ident").text
                self.expect("punct", ":")
                ftype = self.expect("ident").text
                self.expect("punct", ";")
                decl.fields.append(FieldAst(fname, ftype))
            elif self.peek().text == "def":
                decl.methods.append(self.parse_method())
            else:
                raise self.fail("expected 'field', 'def' or '}'")
        return decl

    def parse_method(self) -> MethodAst:
        start = self.expect("keyword", "def").line
        name = self.expect("ident").text
        self.expect("punct", "(")
        params: list[tuple[str, str]] = []
        if not self.accept("punct", ")"):
            while True:
                pname = self.expect("ident").text
                self.expect("punct", ":")
                ptype = self.expect("ident").text
                params.append((pname, ptype))
                if self.accept("punct", ")"):
                    break
                self.expect("punct", ",")
        self.expect("punct", ":")
        ret = self.expect("ident").text
        self.expect("punct", "{")
        body: list[Stmt] = []
        while not self.accept("punct", "}"):
            body.append(self.parse_stmt())
        end = self.tokens[self.pos - 1].line
        return MethodAst(name, tuple(params), ret, tuple(body), start, end)

    def parse_stmt(self) -> Stmt:
        line = self.peek().line
        if self.accept("keyword", "let"):
            name = self.expect("ident").text
            self.expect("punct", "=")
            value = self.parse_expr()
            self.expect("punct", ";")
            return LetStmt(name, value, line)
        if self.accept("keyword", "return"):
            value = self.parse_expr()
            self.expect("punct", ";")
            return ReturnStmt(value, line)
        expr = self.parse_expr()
        if self.accept("punct", "="):
            if not isinstance(expr, (Var, ThisField)):
                raise self.fail("assignment target must be a variable or this.field")
            value = self.parse_expr()
            self.expect("punct", ";")
            return AssignStmt(expr, value, line)
        self.expect("punct", ";")
        return ExprStmt(expr, line)

    def parse_expr(self) -> Expr:
        expr = self.parse_primary()
        while self.accept("punct", "."):
            method = self.expect("ident").text
            self.expect("punct", "(")
            args = self.parse_args()
            expr = Call(expr, method, args)
        return expr

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "string":
            self.next()
            return Literal("String")
        if tok.kind == "number":
            self.next()
            return Literal("Int")
        if self.accept("keyword", "new"):
            tname = self.expect("ident").text
            self.expect("punct", "(")
            return New(tname, self.parse_args())
        if self.accept("keyword", "this"):
            self.expect("punct", ".")
            name = self.expect("ident").text
            if self.accept("punct", "("):
                return Call(None, name, self.parse_args())
            return ThisField(name)
        if tok.kind == "ident":
            self.next()
            if self.accept("punct", "("):
                return Call(None, tok.text, self.parse_args())
            return Var(tok.text)
        raise self.fail(f"unexpected token '{tok.text or tok.kind}'")

    def parse_args(self) -> tuple[Expr, ...]:
        args: list[Expr] = []
        if self.accept("punct", ")"):
            return ()
        while True:
            args.append(self.parse_expr())
            if self.accept("punct", ")"):
                return tuple(args)
            self.expect("punct", ",")


# --- extraction -------------------------------------------------------------

def type_id(name: str) -> str:
    return f"T:{name}"


def signature_id(name: str, param_types: tuple[str, ...], return_type: str) -> str:
    params = ",".join(t.removeprefix("T:") for t in param_types)
    ret = return_type.removeprefix("T:")
    return f"S:{name}({params}):{ret}"


def definition_id(type_name: str, sig_id: str) -> str:
    return f"D:{type_name}.{sig_id.removeprefix('S:')}"


def field_id(type_name: str, field_name: str) -> str:
    return f"F:{type_name}.{field_name}"


class _Extractor:
    def __init__(self, asts: list[TypeAst]):
        self.asts = asts
        self.types: dict[str, TypeDecl] = {}
        self.fields: dict[str, FieldDecl] = {}
        self.signatures: dict[str, MethodSignature] = {}
        self.definitions: dict[str, MethodDefinition] = {}
        self.method_names: list[str] = []
        self.calls: list[CallEdge] = []
        # deduplicated (kind, source, target, type) tuples
        self.flow_keys: set[tuple[FlowKind, str, str, str]] = set()
        # method table: (type name, method name) -> (sig id, def id)
        self.dispatch: dict[tuple[str, str], tuple[str, str]] = {}
        self.field_types: dict[tuple[str, str], str] = {}

    def run(self) -> ProgramModel:
        declared = {ast.name for ast in self.asts}
        if len(declared) != len(self.asts):
            names = [a.name for a in self.asts]
            dup = next(n for n in names if names.count(n) > 1)
            raise PmError(f"type '{dup}' declared more than once")

        for ast in self.asts:
            self._register_type(ast)
        for ast in self.asts:
            for method in ast.methods:
                self._extract_body(ast, method)

        edges = tuple(
            DataFlowEdge(id=f"e{i:04d}", kind=k, source=s, target=t, communicated_type=ct)
            for i, (k, s, t, ct) in enumerate(
                sorted(self.flow_keys, key=lambda x: (x[0].value, x[1], x[2], x[3]))
            )
        )
        pm = ProgramModel(
            type_decls=tuple(sorted(self.types.values(), key=lambda t: t.id)),
            method_names=tuple(sorted(set(self.method_names))),
            signatures=tuple(sorted(self.signatures.values(), key=lambda s: s.id)),
            definitions=tuple(sorted(self.definitions.values(), key=lambda d: d.id)),
            fields=tuple(sorted(self.fields.values(), key=lambda f: f.id)),
            calls=tuple(sorted(self.calls, key=lambda c: (c.caller, c.site))),
            flows=edges,
        )
        validate_pm(pm)
        return pm

    def _ensure_type(self, name: str) -> str:
        tid = type_id(name)
        if tid not in self.types:
            # External/opaque type: referenced but not declared in the corpus.
            self.types[tid] = TypeDecl(id=tid, qualified_name=name)
        return tid

    def _register_type(self, ast: TypeAst) -> None:
        tid = type_id(ast.name)
        member_fields = []
        for f in ast.fields:
            fid = field_id(ast.name, f.name)
            self.fields[fid] = FieldDecl(
                id=fid, name=f.name, declaring_type=tid, value_type=self._ensure_type(f.type_name)
            )
            member_fields.append(fid)
            self.field_types[(ast.name, f.name)] = self._ensure_type(f.type_name)
        member_defs = []
        for m in ast.methods:
            ptypes = tuple(self._ensure_type(t) for _, t in m.params)
            ret = VOID if m.return_type == VOID else self._ensure_type(m.return_type)
            sid = signature_id(m.name, ptypes, ret)
            if sid not in self.signatures:
                self.signatures[sid] = MethodSignature(
                    id=sid, name=m.name, param_types=ptypes, return_type=ret
                )
            did = definition_id(ast.name, sid)
            if did in self.definitions:
                raise PmError(f"method '{m.name}' defined twice with same signature in '{ast.name}'")
            self.definitions[did] = MethodDefinition(
                id=did,
                signature=sid,
                declaring_type=tid,
                location=SourceLocation(ast.file, m.line_start, m.line_end),
            )
            member_defs.append(did)
            self.method_names.append(m.name)
        # Re-register with member lists (types may pre-exist as stubs).
        self.types[tid] = TypeDecl(
            id=tid,
            qualified_name=ast.name,
            member_fields=tuple(member_fields),
            member_defs=tuple(member_defs),
        )

    def _add_flow(self, kind: FlowKind, source: str, target: str, comm_type: str) -> None:
        if comm_type == VOID:
            return
        self.flow_keys.add((kind, source, target, comm_type))

    def _extract_body(self, ast: TypeAst, method: MethodAst) -> None:
        ptypes = tuple(self._ensure_type(t) for _, t in method.params)
        ret = VOID if method.return_type == VOID else self._ensure_type(method.return_type)
        did = definition_id(ast.name, signature_id(method.name, ptypes, ret))

        env: dict[str, tuple[str, str]] = {}  # name -> (endpoint, type id)
        for i, (pname, _) in enumerate(method.params):
            env[pname] = (param_endpoint(did, i), ptypes[i])
        local_count = 0
        call_site = 0

        def fresh_local(tid: str) -> str:
            nonlocal local_count
            ep = local_endpoint(did, local_count)
            local_count += 1
            return ep

        def fail(line: int, message: str) -> CorpusParseError:
            return CorpusParseError(message, ast.file, line)

        def eval_expr(expr: Expr, line: int) -> tuple[str | None, str]:
            nonlocal call_site
            if isinstance(expr, Literal):
                return None, self._ensure_type(expr.type_name)
            if isinstance(expr, Var):
                if expr.name not in env:
                    raise fail(line, f"unknown variable '{expr.name}'")
                return env[expr.name]
            if isinstance(expr, ThisField):
                key = (ast.name, expr.name)
                if key not in self.field_types:
                    raise fail(line, f"unknown field 'this.{expr.name}'")
                return field_endpoint(field_id(ast.name, expr.name)), self.field_types[key]
            if isinstance(expr, New):
                tid = self._ensure_type(expr.type_name)
                result = fresh_local(tid)
                for arg in expr.args:
                    ep, atype = eval_expr(arg, line)
                    if ep is not None:
                        self._add_flow(FlowKind.INTRA, ep, result, atype)
                return result, tid
            if isinstance(expr, Call):
                if expr.receiver is None:
                    recv_type = ast.name
                else:
                    _, rtid = eval_expr(expr.receiver, line)
                    recv_type = self.types[rtid].qualified_name
                target = self.dispatch.get((recv_type, expr.method))
                if target is None:
                    target = self._resolve_method(recv_type, expr.method)
                    if target is None:
                        raise fail(line, f"unresolved method '{recv_type}.{expr.method}'")
                callee_sig_id, callee_def_id = target
                callee_sig = self.signatures[callee_sig_id]
                if len(expr.args) != len(callee_sig.param_types):
                    raise fail(
                        line,
                        f"call to '{recv_type}.{expr.method}' with {len(expr.args)} args, "
                        f"expected {len(callee_sig.param_types)}",
                    )
                self.calls.append(CallEdge(caller=did, callee=callee_def_id, site=call_site))
                call_site += 1
                for i, arg in enumerate(expr.args):
                    ep, _ = eval_expr(arg, line)
                    if ep is not None:
                        self._add_flow(
                            FlowKind.PARAM_PASS,
                            ep,
                            param_endpoint(callee_def_id, i),
                            callee_sig.param_types[i],
                        )
                if callee_sig.return_type == VOID:
                    return None, VOID
                result = fresh_local(callee_sig.return_type)
                self._add_flow(
                    FlowKind.RETURN_FLOW,
                    return_endpoint(callee_def_id),
                    result,
                    callee_sig.return_type,
                )
                return result, callee_sig.return_type
            raise fail(line, f"unsupported expression {expr!r}")

        for stmt in method.body:
            if isinstance(stmt, LetStmt):
                ep, tid = eval_expr(stmt.value, stmt.line)
                if stmt.name in env:
                    target_ep, target_type = env[stmt.name]
                else:
                    if tid == VOID:
                        raise fail(stmt.line, "cannot bind a void expression")
                    target_ep, target_type = fresh_local(tid), tid
                    env[stmt.name] = (target_ep, target_type)
                if ep is not None:
                    self._add_flow(FlowKind.INTRA, ep, target_ep, tid)
            elif isinstance(stmt, AssignStmt):
                ep, tid = eval_expr(stmt.value, stmt.line)
                target_ep, _ = eval_expr(stmt.target, stmt.line)
                if ep is not None and target_ep is not None:
                    self._add_flow(FlowKind.INTRA, ep, target_ep, tid)
            elif isinstance(stmt, ReturnStmt):
                if ret == VOID:
                    raise fail(stmt.line, "return with a value in a void method")
                ep, tid = eval_expr(stmt.value, stmt.line)
                if ep is not None:
                    self._add_flow(FlowKind.INTRA, ep, return_endpoint(did), tid)
            else:
                eval_expr(stmt.value, stmt.line)

    def _resolve_method(self, type_name: str, method: str) -> tuple[str, str] | None:
        tid = type_id(type_name)
        decl = self.types.get(tid)
        if decl is None:
            return None
        for def_id_ in decl.member_defs:
            d = self.definitions[def_id_]
            if self.signatures[d.signature].name == method:
                self.dispatch[(type_name, method)] = (d.signature, def_id_)
                return d.signature, def_id_
        return None


def parse_corpus_file(text: str, filename: str) -> list[TypeAst]:
    return _Parser(_tokenize(text, filename), filename).parse_file()


def extract_pm(sources: dict[str, str]) -> ProgramModel:
    """Build a ProgramModel from {filename: source text}, deterministically.

    Files are processed in sorted filename order; identifiers in the
    resulting model are derived purely from declared names, so extraction
    of the same sources is bit-stable.
    """
    asts: list[TypeAst] = []
    for filename in sorted(sources):
        asts.extend(parse_corpus_file(sources[filename], filename))
    return _Extractor(asts).run()
