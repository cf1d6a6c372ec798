"""Flatten a Java syntax tree into an ordered stream of analysis facts.

The tree-sitter CST is walked once and every construct the KU ruleset can
care about is projected into a :class:`Fact`. Facts carry the name as
written in the source; binding resolution happens later, in
:mod:`kumine.ku.detect`, against a :class:`~kumine.ku.symbols.SymbolIndex`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import tree_sitter
import tree_sitter_java


class ParseError(Exception):
    """Raised when a source file does not parse cleanly."""

    def __init__(self, file: str | None, offset: int, message: str):
        self.file = file
        self.offset = offset
        self.message = message
        where = f"{file}:" if file else ""
        super().__init__(f"{where}{offset}: {message}")


class NodeKind(str, enum.Enum):
    # declarations
    PACKAGE_DECL = "PACKAGE_DECL"
    IMPORT_DECL = "IMPORT_DECL"
    CLASS_DECL = "CLASS_DECL"
    INTERFACE_DECL = "INTERFACE_DECL"
    ENUM_DECL = "ENUM_DECL"
    ANNOTATION_TYPE_DECL = "ANNOTATION_TYPE_DECL"
    RECORD_DECL = "RECORD_DECL"
    METHOD_DECL = "METHOD_DECL"
    CONSTRUCTOR_DECL = "CONSTRUCTOR_DECL"
    FIELD_DECL = "FIELD_DECL"
    LOCAL_VAR_DECL = "LOCAL_VAR_DECL"
    PARAMETER = "PARAMETER"
    TYPE_PARAMETER = "TYPE_PARAMETER"
    STATIC_INITIALIZER = "STATIC_INITIALIZER"
    ENUM_CONSTANT = "ENUM_CONSTANT"
    # statements
    IF_STMT = "IF_STMT"
    SWITCH = "SWITCH"
    WHILE_STMT = "WHILE_STMT"
    DO_STMT = "DO_STMT"
    FOR_STMT = "FOR_STMT"
    ENHANCED_FOR_STMT = "ENHANCED_FOR_STMT"
    BREAK_STMT = "BREAK_STMT"
    CONTINUE_STMT = "CONTINUE_STMT"
    TRY_STMT = "TRY_STMT"
    TRY_WITH_RESOURCES = "TRY_WITH_RESOURCES"
    CATCH_CLAUSE = "CATCH_CLAUSE"
    FINALLY_CLAUSE = "FINALLY_CLAUSE"
    THROW_STMT = "THROW_STMT"
    ASSERT_STMT = "ASSERT_STMT"
    SYNCHRONIZED_STMT = "SYNCHRONIZED_STMT"
    CONSTRUCTOR_CALL = "CONSTRUCTOR_CALL"
    # expressions
    ASSIGNMENT = "ASSIGNMENT"
    BINARY_OP = "BINARY_OP"
    UNARY_OP = "UNARY_OP"
    UPDATE_OP = "UPDATE_OP"
    TERNARY = "TERNARY"
    PARENTHESIZED = "PARENTHESIZED"
    CAST = "CAST"
    INSTANCEOF = "INSTANCEOF"
    ARRAY_CREATION = "ARRAY_CREATION"
    ARRAY_INITIALIZER = "ARRAY_INITIALIZER"
    ARRAY_ACCESS = "ARRAY_ACCESS"
    OBJECT_CREATION = "OBJECT_CREATION"
    ANONYMOUS_CLASS = "ANONYMOUS_CLASS"
    LAMBDA = "LAMBDA"
    METHOD_REFERENCE = "METHOD_REFERENCE"
    METHOD_CALL = "METHOD_CALL"
    FIELD_ACCESS = "FIELD_ACCESS"
    SUPER_ACCESS = "SUPER_ACCESS"
    # modifiers and annotations
    MODIFIER = "MODIFIER"
    ANNOTATION = "ANNOTATION"
    # type references
    TYPE_REF = "TYPE_REF"
    EXTENDS_REF = "EXTENDS_REF"
    IMPLEMENTS_REF = "IMPLEMENTS_REF"
    THROWS_REF = "THROWS_REF"
    POLY_ASSIGN = "POLY_ASSIGN"


TYPE_DECL_KINDS = frozenset({
    NodeKind.CLASS_DECL, NodeKind.INTERFACE_DECL, NodeKind.ENUM_DECL,
    NodeKind.ANNOTATION_TYPE_DECL, NodeKind.RECORD_DECL,
})

# Facts whose name is a type name that must resolve before a type-based rule may fire.
REFERENCE_KINDS = frozenset({
    NodeKind.TYPE_REF, NodeKind.EXTENDS_REF, NodeKind.IMPLEMENTS_REF,
    NodeKind.THROWS_REF, NodeKind.CAST, NodeKind.POLY_ASSIGN, NodeKind.ANNOTATION,
    NodeKind.FIELD_ACCESS,
})


@dataclass(frozen=True, slots=True)
class Fact:
    kind: NodeKind
    name: str | None
    offset: int
    payload: str | None = None
    modifiers: frozenset[str] = frozenset()
    tags: frozenset[str] = frozenset()
    scope: str | None = None  # qualified name of the innermost enclosing type


@dataclass(frozen=True)
class FactStream:
    facts: tuple[Fact, ...] = ()
    length: int = 0  # byte length of the UTF-8 source
    path: str | None = None

    def __iter__(self):
        return iter(self.facts)

    def __len__(self):
        return len(self.facts)

    def of_kind(self, *kinds: NodeKind) -> list[Fact]:
        return [f for f in self.facts if f.kind in kinds]

    @property
    def package(self) -> str:
        for f in self.facts:
            if f.kind is NodeKind.PACKAGE_DECL:
                return f.name or ""
        return ""

    def declared_types(self) -> list[Fact]:
        return [f for f in self.facts if f.kind in TYPE_DECL_KINDS]


@lru_cache(maxsize=1)
def _parser() -> tree_sitter.Parser:
    return tree_sitter.Parser(tree_sitter.Language(tree_sitter_java.language()))


_MODIFIER_KEYWORDS = frozenset({
    "public", "protected", "private", "static", "final", "abstract", "synchronized",
    "native", "transient", "volatile", "strictfp", "default", "sealed", "non-sealed",
})
_PRIMITIVE_NODES = frozenset({"integral_type", "floating_point_type", "boolean_type", "void_type"})
_TYPE_DECL_NODES = {
    "class_declaration": NodeKind.CLASS_DECL,
    "interface_declaration": NodeKind.INTERFACE_DECL,
    "enum_declaration": NodeKind.ENUM_DECL,
    "annotation_type_declaration": NodeKind.ANNOTATION_TYPE_DECL,
    "record_declaration": NodeKind.RECORD_DECL,
}
_SIMPLE_NODES = {
    "if_statement": NodeKind.IF_STMT,
    "while_statement": NodeKind.WHILE_STMT,
    "do_statement": NodeKind.DO_STMT,
    "for_statement": NodeKind.FOR_STMT,
    "break_statement": NodeKind.BREAK_STMT,
    "continue_statement": NodeKind.CONTINUE_STMT,
    "try_statement": NodeKind.TRY_STMT,
    "try_with_resources_statement": NodeKind.TRY_WITH_RESOURCES,
    "finally_clause": NodeKind.FINALLY_CLAUSE,
    "throw_statement": NodeKind.THROW_STMT,
    "assert_statement": NodeKind.ASSERT_STMT,
    "synchronized_statement": NodeKind.SYNCHRONIZED_STMT,
    "ternary_expression": NodeKind.TERNARY,
    "lambda_expression": NodeKind.LAMBDA,
    "static_initializer": NodeKind.STATIC_INITIALIZER,
}
# parenthesized_expression children of these are syntax, not precedence overrides
_CONDITION_PARENTS = frozenset({
    "if_statement", "while_statement", "do_statement", "switch_expression", "synchronized_statement",
})


def _text(node: tree_sitter.Node) -> str:
    return node.text.decode("utf-8")


def _dotted(node: tree_sitter.Node) -> str | None:
    """Dotted text of a pure name path (identifiers joined by '.'), else None."""
    t = node.type
    if t in ("identifier", "type_identifier", "this"):
        return _text(node)
    if t in ("scoped_identifier", "scoped_type_identifier"):
        return "".join(_text(c) for c in node.children if c.type != "annotation" and c.type != "marker_annotation")
    if t == "field_access":
        obj = node.child_by_field_name("object")
        fld = node.child_by_field_name("field")
        if obj is None or fld is None:
            return None
        head = _dotted(obj)
        return f"{head}.{_text(fld)}" if head else None
    return None


@dataclass
class _TypeInfo:
    base: str | None = None  # erasure as written, None for primitives and `var`
    dims: int = 0
    primitive: bool = False


@dataclass
class _ClassInfo:
    fqn: str
    method_counts: dict[str, int] = field(default_factory=dict)
    ctor_count: int = 0
    private_fields: frozenset[str] = frozenset()
    is_enum: bool = False
    is_interface: bool = False


@dataclass(frozen=True)
class _Ctx:
    scope: str | None = None
    cls: _ClassInfo | None = None
    in_body: bool = False  # inside a method/constructor/initializer body


class _Extractor:
    def __init__(self, source: bytes, path: str | None):
        self.source = source
        self.path = path
        self.facts: list[tuple[int, int, Fact]] = []
        self.seq = 0
        self.package = ""
        self.var_names: set[str] = set()

    # -- emission -------------------------------------------------------
    def emit(self, kind: NodeKind, node_or_offset, name=None, payload=None,
             modifiers=frozenset(), tags=(), ctx: _Ctx | None = None):
        offset = node_or_offset if isinstance(node_or_offset, int) else node_or_offset.start_byte
        fact = Fact(kind, name, offset, payload, frozenset(modifiers), frozenset(tags),
                    ctx.scope if ctx else None)
        self.facts.append((offset, self.seq, fact))
        self.seq += 1

    # -- pre-pass ---------------------------------------------------------
    def collect_names(self, root: tree_sitter.Node):
        stack = [root]
        while stack:
            node = stack.pop()
            t = node.type
            if t in ("variable_declarator", "formal_parameter", "catch_formal_parameter",
                     "enhanced_for_statement", "resource"):
                name = node.child_by_field_name("name")
                if name is not None and name.type == "identifier":
                    self.var_names.add(_text(name))
            elif t == "spread_parameter":
                for c in node.children:
                    if c.type == "variable_declarator":
                        n = c.child_by_field_name("name")
                        if n is not None:
                            self.var_names.add(_text(n))
            elif t == "lambda_expression":
                params = node.child_by_field_name("parameters")
                if params is not None and params.type == "identifier":
                    self.var_names.add(_text(params))
                elif params is not None:
                    for c in params.children:
                        if c.type == "identifier":
                            self.var_names.add(_text(c))
            stack.extend(node.children)

    # -- types ------------------------------------------------------------
    def type_refs(self, node: tree_sitter.Node, ctx: _Ctx, tag: str) -> _TypeInfo:
        """Emit TYPE_REF facts for every named type inside ``node``; describe the outer type."""
        t = node.type
        if t in _PRIMITIVE_NODES:
            return _TypeInfo(base=None, primitive=True)
        if t == "type_identifier":
            name = _text(node)
            if name == "var":
                return _TypeInfo()
            self.emit(NodeKind.TYPE_REF, node, name=name, tags=(tag,), ctx=ctx)
            return _TypeInfo(base=name)
        if t == "scoped_type_identifier":
            name = _dotted(node)
            self.emit(NodeKind.TYPE_REF, node, name=name, tags=(tag,), ctx=ctx)
            return _TypeInfo(base=name)
        if t == "generic_type":
            info = _TypeInfo()
            for c in node.children:
                if c.type in ("type_identifier", "scoped_type_identifier"):
                    info = self.type_refs(c, ctx, tag)
                elif c.type == "type_arguments":
                    for a in c.named_children:
                        self.type_refs(a, ctx, "type_arg")
            return info
        if t == "array_type":
            elem = node.child_by_field_name("element")
            dims = node.child_by_field_name("dimensions")
            info = self.type_refs(elem, ctx, tag) if elem is not None else _TypeInfo()
            info.dims += _text(dims).count("[") if dims is not None else 1
            return info
        if t == "annotated_type":
            info = _TypeInfo()
            for c in node.named_children:
                if c.type in ("annotation", "marker_annotation"):
                    self.visit(c, ctx)
                else:
                    info = self.type_refs(c, ctx, tag)
            return info
        if t == "wildcard":
            for c in node.named_children:
                if c.type not in ("annotation", "marker_annotation"):
                    self.type_refs(c, ctx, "type_arg")
            return _TypeInfo()
        if t == "type_bound":
            for c in node.named_children:
                self.type_refs(c, ctx, "bound")
            return _TypeInfo()
        return _TypeInfo()

    def modifiers(self, node: tree_sitter.Node | None, ctx: _Ctx) -> frozenset[str]:
        if node is None:
            return frozenset()
        mods = set()
        for c in node.children:
            if c.type in ("annotation", "marker_annotation"):
                self.visit(c, ctx)
            elif _text(c) in _MODIFIER_KEYWORDS:
                kw = _text(c)
                mods.add(kw)
                self.emit(NodeKind.MODIFIER, c, payload=kw, ctx=ctx)
        return frozenset(mods)

    @staticmethod
    def _modifiers_node(node):
        for c in node.children:
            if c.type == "modifiers":
                return c
        return None

    # -- class analysis -----------------------------------------------------
    def analyse_class(self, body: tree_sitter.Node | None, fqn: str, kind: NodeKind) -> _ClassInfo:
        info = _ClassInfo(fqn=fqn, is_enum=kind is NodeKind.ENUM_DECL,
                          is_interface=kind is NodeKind.INTERFACE_DECL)
        if body is None:
            return info
        members = list(body.named_children)
        for c in body.named_children:
            if c.type == "enum_body_declarations":
                members.extend(c.named_children)
        private = set()
        for m in members:
            if m.type == "method_declaration":
                name = _text(m.child_by_field_name("name"))
                info.method_counts[name] = info.method_counts.get(name, 0) + 1
            elif m.type in ("constructor_declaration", "compact_constructor_declaration"):
                info.ctor_count += 1
            elif m.type == "field_declaration":
                mods = self._modifiers_node(m)
                if mods is not None and any(_text(x) == "private" for x in mods.children):
                    for d in m.children_by_field_name("declarator"):
                        private.add(_text(d.child_by_field_name("name")))
        info.private_fields = frozenset(private)
        return info

    def class_tags(self, body, fqn: str, mods: frozenset[str]) -> set[str]:
        """Tags describing whole-class idioms: immutable and singleton classes."""
        tags = set()
        if body is None:
            return tags
        fields = [m for m in body.named_children if m.type == "field_declaration"]
        ctors = [m for m in body.named_children if m.type == "constructor_declaration"]
        methods = [m for m in body.named_children if m.type == "method_declaration"]

        def mods_of(n):
            mn = self._modifiers_node(n)
            return {_text(x) for x in mn.children} if mn is not None else set()

        instance_fields = [f for f in fields if "static" not in mods_of(f)]
        if ("final" in mods and instance_fields
                and all({"private", "final"} <= mods_of(f) for f in instance_fields)
                and not any(_text(m.child_by_field_name("name")).startswith("set") for m in methods)):
            tags.add("immutable")
        simple = fqn.rsplit(".", 1)[-1]
        if ctors and all("private" in mods_of(c) for c in ctors):
            for f in fields:
                ftype = f.child_by_field_name("type")
                if "static" in mods_of(f) and ftype is not None and _text(ftype) == simple:
                    tags.add("singleton")
                    break
        return tags

    # -- visitor ------------------------------------------------------------
    def visit(self, root: tree_sitter.Node, ctx: _Ctx):
        stack = [(root, ctx)]
        while stack:
            node, c = stack.pop()
            children = self.handle(node, c)
            if children:
                stack.extend(reversed(children))

    def handle(self, node: tree_sitter.Node, ctx: _Ctx):
        """Emit facts for ``node``; return the (child, ctx) pairs still to visit."""
        t = node.type
        default = [(ch, ctx) for ch in node.children]

        if t in ("line_comment", "block_comment", "ERROR"):
            return None
        if t == "package_declaration":
            for ch in node.named_children:
                if ch.type in ("identifier", "scoped_identifier"):
                    self.package = _dotted(ch)
                    self.emit(NodeKind.PACKAGE_DECL, node, name=self.package, ctx=ctx)
            return None
        if t == "import_declaration":
            name = None
            tags = set()
            for ch in node.children:
                if ch.type in ("identifier", "scoped_identifier"):
                    name = _dotted(ch)
                elif ch.type == "asterisk":
                    tags.add("on_demand")
                elif ch.type == "static":
                    tags.add("static")
            if name:
                self.emit(NodeKind.IMPORT_DECL, node, name=name, tags=tags, ctx=ctx)
            return None
        if t in _TYPE_DECL_NODES:
            return self.type_declaration(node, ctx, _TYPE_DECL_NODES[t])
        if t in ("method_declaration", "constructor_declaration", "compact_constructor_declaration"):
            return self.method_declaration(node, ctx)
        if t in ("field_declaration", "constant_declaration", "local_variable_declaration"):
            return self.variable_declaration(node, ctx)
        if t in _SIMPLE_NODES:
            self.emit(_SIMPLE_NODES[t], node, ctx=ctx)
            if t == "static_initializer":
                return [(ch, _Ctx(ctx.scope, ctx.cls, True)) for ch in node.children]
            return default
        if t == "enhanced_for_statement":
            self.emit(NodeKind.ENHANCED_FOR_STMT, node, ctx=ctx)
            mods = self.modifiers(self._modifiers_node(node), ctx)
            tnode = node.child_by_field_name("type")
            name = node.child_by_field_name("name")
            info = self.type_refs(tnode, ctx, "var_type") if tnode is not None else _TypeInfo()
            self.emit(NodeKind.LOCAL_VAR_DECL, name if name is not None else node,
                      name=_text(name) if name is not None else None, payload=info.base,
                      modifiers=mods, tags=self._var_tags(info), ctx=ctx)
            return [(ch, ctx) for ch in (node.child_by_field_name("value"), node.child_by_field_name("body"))
                    if ch is not None]
        if t == "resource":
            tnode = node.child_by_field_name("type")
            if tnode is None:
                return default
            mods = self.modifiers(self._modifiers_node(node), ctx)
            info = self.type_refs(tnode, ctx, "var_type")
            name = node.child_by_field_name("name")
            self.emit(NodeKind.LOCAL_VAR_DECL, name if name is not None else node,
                      name=_text(name) if name is not None else None, payload=info.base,
                      modifiers=mods, tags=self._var_tags(info), ctx=ctx)
            value = node.child_by_field_name("value")
            return [(value, ctx)] if value is not None else None
        if t == "catch_clause":
            multi = False
            for ch in node.named_children:
                if ch.type == "catch_formal_parameter":
                    for ct in ch.named_children:
                        if ct.type == "catch_type":
                            multi = sum(1 for x in ct.named_children) > 1
            self.emit(NodeKind.CATCH_CLAUSE, node, tags=("multi",) if multi else (), ctx=ctx)
            return default
        if t == "catch_formal_parameter":
            mods = self.modifiers(self._modifiers_node(node), ctx)
            base = None
            for ch in node.named_children:
                if ch.type == "catch_type":
                    for ct in ch.named_children:
                        info = self.type_refs(ct, ctx, "catch")
                        base = base or info.base
            name = node.child_by_field_name("name")
            self.emit(NodeKind.PARAMETER, name if name is not None else node,
                      name=_text(name) if name is not None else None, payload=base,
                      modifiers=mods, tags=("catch",), ctx=ctx)
            return None
        if t == "switch_expression":
            self.emit(NodeKind.SWITCH, node,
                      payload="statement" if node.parent is not None and node.parent.type in ("block", "switch_block_statement_group", "program", "constructor_body") else "expression",
                      ctx=ctx)
            return default
        if t == "explicit_constructor_invocation":
            ctor = node.child_by_field_name("constructor")
            self.emit(NodeKind.CONSTRUCTOR_CALL, node, payload=_text(ctor) if ctor is not None else None, ctx=ctx)
            return default
        if t == "assignment_expression":
            op = node.child_by_field_name("operator")
            self.emit(NodeKind.ASSIGNMENT, node, payload=_text(op) if op is not None else "=", ctx=ctx)
            return default
        if t == "binary_expression":
            op = node.child_by_field_name("operator")
            self.emit(NodeKind.BINARY_OP, op if op is not None else node,
                      payload=_text(op) if op is not None else None, ctx=ctx)
            return default
        if t == "unary_expression":
            op = node.child_by_field_name("operator")
            self.emit(NodeKind.UNARY_OP, node, payload=_text(op) if op is not None else None, ctx=ctx)
            return default
        if t == "update_expression":
            op = next((_text(ch) for ch in node.children if _text(ch) in ("++", "--")), None)
            self.emit(NodeKind.UPDATE_OP, node, payload=op, ctx=ctx)
            return default
        if t == "parenthesized_expression":
            parent = node.parent
            if parent is None or parent.type not in _CONDITION_PARENTS:
                self.emit(NodeKind.PARENTHESIZED, node, ctx=ctx)
            return default
        if t == "cast_expression":
            tnode = node.child_by_field_name("type")
            info = self.type_refs(tnode, ctx, "cast") if tnode is not None else _TypeInfo()
            prim = info.primitive and info.dims == 0
            self.emit(NodeKind.CAST, node, name=info.base,
                      tags=("primitive",) if prim else ("reference",), ctx=ctx)
            value = node.child_by_field_name("value")
            return [(value, ctx)] if value is not None else None
        if t == "instanceof_expression":
            self.emit(NodeKind.INSTANCEOF, node, ctx=ctx)
            rest = []
            seen_kw = False
            for ch in node.children:
                if ch.type == "instanceof":
                    seen_kw = True
                elif seen_kw and ch.is_named and ch.type not in ("identifier", "record_pattern", "type_pattern"):
                    self.type_refs(ch, ctx, "instanceof")
                else:
                    rest.append((ch, ctx))
            return rest
        if t == "array_creation_expression":
            tnode = node.child_by_field_name("type")
            if tnode is not None:
                self.type_refs(tnode, ctx, "creation")
            dims = sum(1 for ch in node.children if ch.type == "dimensions_expr")
            for ch in node.children:
                if ch.type == "dimensions":
                    dims += _text(ch).count("[")
            self.emit(NodeKind.ARRAY_CREATION, node, tags=("dim1",) if dims <= 1 else ("dimN",), ctx=ctx)
            rest = []
            for ch in node.children:
                if ch.type == "array_initializer":
                    rest.extend((x, ctx) for x in self._initializer_leaves(ch))
                elif ch.type == "dimensions_expr":
                    rest.append((ch, ctx))
            return rest
        if t == "array_initializer":
            depth = self._initializer_depth(node)
            self.emit(NodeKind.ARRAY_INITIALIZER, node, tags=("dim1",) if depth <= 1 else ("dimN",), ctx=ctx)
            return [(x, ctx) for x in self._initializer_leaves(node)]
        if t == "array_access":
            depth = 1
            inner = node.child_by_field_name("array")
            rest = [(node.child_by_field_name("index"), ctx)]
            while inner is not None and inner.type == "array_access":
                depth += 1
                rest.append((inner.child_by_field_name("index"), ctx))
                inner = inner.child_by_field_name("array")
            self.emit(NodeKind.ARRAY_ACCESS, node, tags=("dim1",) if depth <= 1 else ("dimN",), ctx=ctx)
            if inner is not None:
                rest.append((inner, ctx))
            return [r for r in rest if r[0] is not None]
        if t == "object_creation_expression":
            tnode = node.child_by_field_name("type")
            info = self.type_refs(tnode, ctx, "creation") if tnode is not None else _TypeInfo()
            self.emit(NodeKind.OBJECT_CREATION, node, name=info.base, ctx=ctx)
            rest = []
            for ch in node.children:
                if ch.type == "class_body":
                    self.emit(NodeKind.ANONYMOUS_CLASS, ch, name=info.base, ctx=ctx)
                    anon = _ClassInfo(fqn=ctx.scope or "")
                    rest.append((ch, _Ctx(ctx.scope, self.analyse_class(ch, anon.fqn, NodeKind.CLASS_DECL), False)))
                elif ch.type == "argument_list" or ch.type in ("type_arguments",):
                    rest.append((ch, ctx))
                elif ch.is_named and ch is not tnode:
                    rest.append((ch, ctx))
            return rest
        if t == "method_reference":
            self.emit(NodeKind.METHOD_REFERENCE, node, ctx=ctx)
            first = node.named_children[0] if node.named_children else None
            if first is not None and first.type in ("type_identifier", "scoped_type_identifier", "generic_type", "array_type"):
                self.type_refs(first, ctx, "method_ref")
                return None
            if first is not None and first.type == "identifier" and self._is_type_name(_text(first)):
                self.emit(NodeKind.TYPE_REF, first, name=_text(first), tags=("method_ref",), ctx=ctx)
                return None
            return default
        if t == "method_invocation":
            return self.method_invocation(node, ctx)
        if t == "field_access":
            return self.field_access(node, ctx)
        if t == "class_literal":
            for ch in node.named_children:
                self.type_refs(ch, ctx, "class_literal")
            return None
        if t in ("annotation", "marker_annotation"):
            name_node = node.child_by_field_name("name")
            self.emit(NodeKind.ANNOTATION, node, name=_dotted(name_node) if name_node is not None else None, ctx=ctx)
            args = node.child_by_field_name("arguments")
            return [(args, ctx)] if args is not None else None
        if t == "modifiers":
            self.modifiers(node, ctx)
            return None
        if t == "formal_parameter" or t == "spread_parameter" or t == "receiver_parameter":
            self.parameter(node, ctx)
            return None
        if t == "type_parameter":
            name = next((ch for ch in node.named_children if ch.type in ("type_identifier", "identifier")), None)
            self.emit(NodeKind.TYPE_PARAMETER, node, name=_text(name) if name is not None else None, ctx=ctx)
            for ch in node.named_children:
                if ch.type == "type_bound":
                    self.type_refs(ch, ctx, "bound")
            return None
        if t == "enum_constant":
            name = node.child_by_field_name("name")
            self.emit(NodeKind.ENUM_CONSTANT, node, name=_text(name) if name is not None else None, ctx=ctx)
            return default
        return default

    # -- handlers -------------------------------------------------------------
    def _is_type_name(self, ident: str) -> bool:
        return ident not in self.var_names and ident[:1].isupper()

    @staticmethod
    def _initializer_depth(node) -> int:
        inner = [c for c in node.named_children if c.type == "array_initializer"]
        return 1 + max((_Extractor._initializer_depth(c) for c in inner), default=0)

    @staticmethod
    def _initializer_leaves(node):
        out = []
        for c in node.named_children:
            if c.type == "array_initializer":
                out.extend(_Extractor._initializer_leaves(c))
            else:
                out.append(c)
        return out

    @staticmethod
    def _var_tags(info: _TypeInfo) -> tuple[str, ...]:
        tags = []
        if info.dims == 1:
            tags.append("dim1")
        elif info.dims > 1:
            tags.append("dimN")
        if info.primitive and info.dims == 0:
            tags.append("primitive")
        return tuple(tags)

    def type_declaration(self, node, ctx: _Ctx, kind: NodeKind):
        name_node = node.child_by_field_name("name")
        simple = _text(name_node) if name_node is not None else "?"
        if ctx.scope is None:
            fqn = f"{self.package}.{simple}" if self.package else simple
        else:
            fqn = f"{ctx.scope}.{simple}"
        mods = self.modifiers(self._modifiers_node(node), ctx)
        body = node.child_by_field_name("body")
        tags = set()
        if ctx.scope is not None:
            tags.add("local" if ctx.in_body else "nested")
        tparams = node.child_by_field_name("type_parameters")
        if tparams is not None:
            tags.add("generic")
        if kind is NodeKind.CLASS_DECL:
            tags |= self.class_tags(body, fqn, mods)
        self.emit(kind, name_node if name_node is not None else node, name=fqn, modifiers=mods, tags=tags, ctx=ctx)

        inner = _Ctx(fqn, self.analyse_class(body, fqn, kind), False)
        if tparams is not None:
            self.visit(tparams, inner)
        for ch in node.children:
            if ch.type == "superclass":
                for st in ch.named_children:
                    self._supertype(st, inner, NodeKind.EXTENDS_REF)
            elif ch.type in ("super_interfaces", "extends_interfaces"):
                ref_kind = NodeKind.IMPLEMENTS_REF if ch.type == "super_interfaces" else NodeKind.EXTENDS_REF
                for tl in ch.named_children:
                    for st in (tl.named_children if tl.type == "type_list" else [tl]):
                        self._supertype(st, inner, ref_kind)
        rest = []
        params = node.child_by_field_name("parameters")
        if params is not None:  # record components
            rest.append((params, inner))
        if body is not None:
            rest.append((body, inner))
        return rest

    def _supertype(self, node, ctx: _Ctx, kind: NodeKind):
        if node.type == "generic_type":
            base = next((c for c in node.named_children if c.type in ("type_identifier", "scoped_type_identifier")), None)
            if base is not None:
                self.emit(kind, base, name=_dotted(base), ctx=ctx)
            for c in node.named_children:
                if c.type == "type_arguments":
                    for a in c.named_children:
                        self.type_refs(a, ctx, "type_arg")
        elif node.type in ("type_identifier", "scoped_type_identifier"):
            self.emit(kind, node, name=_dotted(node), ctx=ctx)

    def method_declaration(self, node, ctx: _Ctx):
        t = node.type
        is_ctor = t != "method_declaration"
        name_node = node.child_by_field_name("name")
        name = _text(name_node) if name_node is not None else "?"
        mods = self.modifiers(self._modifiers_node(node), ctx)
        tags = set()
        info = _TypeInfo()
        if not is_ctor:
            tnode = node.child_by_field_name("type")
            if tnode is not None:
                info = self.type_refs(tnode, ctx, "return_type")
                if tnode.type != "void_type":
                    tags.add("returns_value")
        tparams = node.child_by_field_name("type_parameters")
        if tparams is not None:
            self.visit(tparams, ctx)
        params = node.child_by_field_name("parameters")
        n_params = 0
        if params is not None:
            for p in params.named_children:
                if p.type in ("formal_parameter", "spread_parameter"):
                    n_params += 1
                    if p.type == "spread_parameter":
                        tags.add("varargs")
                    self.parameter(p, ctx)
        if n_params:
            tags.add("has_params")
        for ch in node.children:
            if ch.type == "throws":
                tags.add("throws")
                for tt in ch.named_children:
                    if tt.type in ("type_identifier", "scoped_type_identifier", "generic_type"):
                        base = tt if tt.type != "generic_type" else tt.named_children[0]
                        self.emit(NodeKind.THROWS_REF, base, name=_dotted(base), ctx=ctx)
        cls = ctx.cls
        if cls is not None:
            if cls.is_enum:
                tags.add("in_enum")
            if cls.is_interface:
                tags.add("in_interface")
            if is_ctor and cls.ctor_count > 1:
                tags.add("overloaded")
            if not is_ctor and cls.method_counts.get(name, 0) > 1:
                tags.add("overloaded")
            if not is_ctor:
                tags |= self._accessor_tags(name, n_params, "returns_value" in tags, cls)
        kind = NodeKind.CONSTRUCTOR_DECL if is_ctor else NodeKind.METHOD_DECL
        qual = f"{ctx.scope}.{name}" if ctx.scope else name
        self.emit(kind, name_node if name_node is not None else node, name=qual,
                  payload=info.base if not is_ctor else None, modifiers=mods, tags=tags, ctx=ctx)
        body = node.child_by_field_name("body")
        return [(body, _Ctx(ctx.scope, ctx.cls, True))] if body is not None else None

    @staticmethod
    def _accessor_tags(name: str, n_params: int, returns: bool, cls: _ClassInfo) -> set[str]:
        def field_for(prop: str) -> bool:
            if not prop:
                return False
            return prop in cls.private_fields or (prop[0].lower() + prop[1:]) in cls.private_fields

        if name.startswith("get") and n_params == 0 and returns and field_for(name[3:]):
            return {"getter"}
        if name.startswith("is") and n_params == 0 and returns and field_for(name[2:]):
            return {"getter"}
        if name.startswith("set") and n_params == 1 and field_for(name[3:]):
            return {"setter"}
        return set()

    def parameter(self, node, ctx: _Ctx):
        mods = self.modifiers(self._modifiers_node(node), ctx)
        tags = set()
        if node.type == "spread_parameter":
            tnode = next((c for c in node.named_children if c.type not in ("modifiers", "variable_declarator")), None)
            decl = next((c for c in node.named_children if c.type == "variable_declarator"), None)
            name = decl.child_by_field_name("name") if decl is not None else None
            tags.add("varargs")
        else:
            tnode = node.child_by_field_name("type")
            name = node.child_by_field_name("name")
        info = self.type_refs(tnode, ctx, "param_type") if tnode is not None else _TypeInfo()
        tags.update(self._var_tags(info))
        self.emit(NodeKind.PARAMETER, name if name is not None else node,
                  name=_text(name) if name is not None else None, payload=info.base,
                  modifiers=mods, tags=tags, ctx=ctx)

    def variable_declaration(self, node, ctx: _Ctx):
        kind = NodeKind.LOCAL_VAR_DECL if node.type == "local_variable_declaration" else NodeKind.FIELD_DECL
        mods = self.modifiers(self._modifiers_node(node), ctx)
        tnode = node.child_by_field_name("type")
        tag = "var_type" if kind is NodeKind.LOCAL_VAR_DECL else "field_type"
        info = self.type_refs(tnode, ctx, tag) if tnode is not None else _TypeInfo()
        rest = []
        for decl in node.children_by_field_name("declarator"):
            name_node = decl.child_by_field_name("name")
            extra_dims = sum(_text(c).count("[") for c in decl.children if c.type == "dimensions")
            dinfo = _TypeInfo(info.base, info.dims + extra_dims, info.primitive)
            self.emit(kind, name_node if name_node is not None else decl,
                      name=_text(name_node) if name_node is not None else None,
                      payload=info.base, modifiers=mods, tags=self._var_tags(dinfo), ctx=ctx)
            value = decl.child_by_field_name("value")
            if value is not None:
                if (value.type == "object_creation_expression" and info.base and dinfo.dims == 0):
                    vt = value.child_by_field_name("type")
                    created = None
                    if vt is not None:
                        created = _dotted(vt) if vt.type != "generic_type" else _dotted(vt.named_children[0])
                    if created and created.rsplit(".", 1)[-1] != info.base.rsplit(".", 1)[-1]:
                        self.emit(NodeKind.POLY_ASSIGN, value, name=info.base, payload=created, ctx=ctx)
                rest.append((value, ctx))
        return rest

    def _receiver(self, obj: tree_sitter.Node | None) -> str:
        if obj is None:
            return "implicit"
        t = obj.type
        if t == "this":
            return "this"
        if t == "super":
            return "super"
        if t == "identifier":
            name = _text(obj)
            return f"type:{name}" if self._is_type_name(name) else f"var:{name}"
        if t == "field_access":
            path = _dotted(obj)
            return f"path:{path}" if path else "expr"
        if t == "method_invocation":
            name = obj.child_by_field_name("name")
            return f"call:{name.start_byte}" if name is not None else "expr"
        if t == "object_creation_expression":
            tn = obj.child_by_field_name("type")
            if tn is not None and tn.type == "generic_type":
                tn = tn.named_children[0]
            return f"typed:{_dotted(tn)}" if tn is not None and _dotted(tn) else "expr"
        if t == "cast_expression":
            tn = obj.child_by_field_name("type")
            if tn is not None and tn.type == "generic_type":
                tn = tn.named_children[0]
            return f"typed:{_dotted(tn)}" if tn is not None and _dotted(tn) else "expr"
        if t == "string_literal":
            return "lit:String"
        if t == "parenthesized_expression" and obj.named_children:
            return self._receiver(obj.named_children[0])
        return "expr"

    def _static_qualifier(self, obj, ctx: _Ctx):
        """Emit a TYPE_REF when a member access is qualified by a type name."""
        if obj is None:
            return
        if obj.type == "identifier":
            name = _text(obj)
            if self._is_type_name(name):
                self.emit(NodeKind.TYPE_REF, obj, name=name, tags=("static_qualifier",), ctx=ctx)

    def method_invocation(self, node, ctx: _Ctx):
        obj = node.child_by_field_name("object")
        name = node.child_by_field_name("name")
        self.emit(NodeKind.METHOD_CALL, name if name is not None else node,
                  name=_text(name) if name is not None else None, payload=self._receiver(obj), ctx=ctx)
        rest = []
        if obj is not None:
            if obj.type == "super":
                self.emit(NodeKind.SUPER_ACCESS, obj, payload="method", ctx=ctx)
            elif obj.type == "identifier":
                self._static_qualifier(obj, ctx)
            else:
                rest.append((obj, ctx))
        for ch in node.children:
            if ch.type in ("argument_list", "type_arguments"):
                rest.append((ch, ctx))
        return rest

    def field_access(self, node, ctx: _Ctx):
        obj = node.child_by_field_name("object")
        fld = node.child_by_field_name("field")
        if obj is not None and obj.type == "super":
            self.emit(NodeKind.SUPER_ACCESS, obj, payload="field", ctx=ctx)
            return None
        path = _dotted(node)
        if path is None:
            return [(obj, ctx)] if obj is not None else None
        segs = path.split(".")
        if segs[0] == "this" or segs[0] in self.var_names or not any(s[:1].isupper() for s in segs):
            self.emit(NodeKind.FIELD_ACCESS, fld if fld is not None else node, name=path, ctx=ctx)
            return None
        # qualified type name followed by static field accesses
        first_type = next(i for i, s in enumerate(segs) if s[:1].isupper())
        type_name = ".".join(segs[: first_type + 1])
        self.emit(NodeKind.TYPE_REF, node, name=type_name, tags=("static_qualifier",), ctx=ctx)
        if first_type < len(segs) - 1:
            self.emit(NodeKind.FIELD_ACCESS, fld if fld is not None else node, name=path, ctx=ctx)
        return None


def _first_error(node: tree_sitter.Node) -> tree_sitter.Node | None:
    stack = [node]
    while stack:
        n = stack.pop()
        if n.is_error or n.is_missing:
            return n
        if n.has_error:
            stack.extend(reversed(n.children))
    return None


def parse_source(text: str, path: str | None = None) -> FactStream:
    """Parse Java source text into a :class:`FactStream`.

    Raises :class:`ParseError` when the file contains syntax errors.
    """
    source = text.encode("utf-8")
    if not source.strip():
        return FactStream((), len(source), path)
    tree = _parser().parse(source)
    root = tree.root_node
    if root.has_error:
        bad = _first_error(root)
        offset = bad.start_byte if bad is not None else 0
        what = "missing token" if bad is not None and bad.is_missing else "syntax error"
        raise ParseError(path, min(offset, max(len(source) - 1, 0)), what)
    ex = _Extractor(source, path)
    ex.collect_names(root)
    ex.visit(root, _Ctx())
    ex.facts.sort(key=lambda item: (item[0], item[1]))
    return FactStream(tuple(f for _, _, f in ex.facts), len(source), path)
