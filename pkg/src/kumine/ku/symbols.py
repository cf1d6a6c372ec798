"""Project symbol index and per-file name resolution.

Only names that resolve to a type declared in the project snapshot or to a
platform package (``java.``, ``javax.``, ``jakarta.`` by default) are
considered known. Everything else is treated as third-party and never
contributes to a KU count.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .facts import TYPE_DECL_KINDS, FactStream, NodeKind, ParseError, parse_source
from .platform import JAVA_LANG_TYPES, PACKAGE_TYPES, STATIC_FIELD_TYPES, return_type

log = logging.getLogger(__name__)

DEFAULT_PLATFORM_PREFIXES = ("java.", "javax.", "jakarta.")

_KIND_NAMES = {
    NodeKind.CLASS_DECL: "class",
    NodeKind.INTERFACE_DECL: "interface",
    NodeKind.ENUM_DECL: "enum",
    NodeKind.ANNOTATION_TYPE_DECL: "annotation",
    NodeKind.RECORD_DECL: "record",
}


@dataclass(frozen=True)
class SymbolIndex:
    project_types: frozenset[str] = frozenset()
    platform_prefixes: tuple[str, ...] = DEFAULT_PLATFORM_PREFIXES
    type_kinds: Mapping[str, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        for p in self.platform_prefixes:
            if not p or not p.endswith("."):
                raise ValueError(f"platform prefix must be non-empty and end with '.': {p!r}")

    def contains(self, name: str) -> bool:
        return name in self.project_types

    def kind_of(self, name: str) -> str | None:
        return self.type_kinds.get(name)

    def is_platform(self, name: str) -> bool:
        return name.startswith(self.platform_prefixes)

    def is_known(self, name: str | None) -> bool:
        return name is not None and (self.contains(name) or self.is_platform(name))


def declared_types(stream: FactStream) -> dict[str, str]:
    """Qualified names of the types declared in one file, mapped to their kind."""
    out = {}
    for f in stream.facts:
        if f.kind in TYPE_DECL_KINDS and f.name:
            kind = _KIND_NAMES[f.kind]
            if kind == "class" and "abstract" in f.modifiers:
                kind = "abstract_class"
            out[f.name] = kind
    return out


def index_from_streams(streams: Iterable[FactStream],
                       platform_prefixes: tuple[str, ...] = DEFAULT_PLATFORM_PREFIXES) -> SymbolIndex:
    kinds: dict[str, str] = {}
    for s in streams:
        kinds.update(declared_types(s))
    return SymbolIndex(frozenset(kinds), tuple(platform_prefixes), kinds)


def build_symbol_index(files: Mapping[str, str],
                       platform_prefixes: tuple[str, ...] = DEFAULT_PLATFORM_PREFIXES) -> SymbolIndex:
    """Collect every type declared across ``files`` (path -> source text)."""
    streams = []
    for path in sorted(files):
        try:
            streams.append(parse_source(files[path], path))
        except ParseError as exc:
            log.warning("skipping unparseable file %s: %s", path, exc)
    return index_from_streams(streams, platform_prefixes)


class FileResolver:
    """Resolve names written in one file to qualified names.

    Resolution order for a simple type name: type variables (never resolve),
    enclosing and file-local declarations, single-type imports, the file's
    own package, project wildcard imports, ``java.lang``, then platform
    wildcard imports.
    """

    def __init__(self, stream: FactStream, index: SymbolIndex):
        self.index = index
        self.package = stream.package
        self.single_imports: dict[str, str] = {}
        self.wildcards: list[str] = []
        self.type_vars: set[str] = set()
        self.local_types: dict[str, list[str]] = {}
        self.vars: dict[str, list[tuple[int, str | None, str | None]]] = {}
        self.calls: dict[int, object] = {}
        for f in stream.facts:
            k = f.kind
            if k is NodeKind.IMPORT_DECL:
                if "on_demand" in f.tags:
                    self.wildcards.append(f.name)
                elif "static" not in f.tags:
                    self.single_imports[f.name.rsplit(".", 1)[-1]] = f.name
            elif k is NodeKind.TYPE_PARAMETER and f.name:
                self.type_vars.add(f.name)
            elif k in TYPE_DECL_KINDS and f.name:
                self.local_types.setdefault(f.name.rsplit(".", 1)[-1], []).append(f.name)
            elif k in (NodeKind.LOCAL_VAR_DECL, NodeKind.FIELD_DECL, NodeKind.PARAMETER) and f.name:
                self.vars.setdefault(f.name, []).append((f.offset, f.payload, f.scope))
            elif k is NodeKind.METHOD_CALL:
                self.calls[f.offset] = f
        self._memo: dict[tuple[str, str | None], str | None] = {}

    # -- types -------------------------------------------------------------
    def resolve_type(self, name: str | None, scope: str | None = None) -> str | None:
        if not name:
            return None
        key = (name, scope)
        if key not in self._memo:
            self._memo[key] = self._resolve_type(name, scope)
        return self._memo[key]

    def _resolve_type(self, name: str, scope: str | None) -> str | None:
        if "." in name:
            if self.index.contains(name) or self.index.is_platform(name):
                return name
            head, rest = name.split(".", 1)
            base = self._resolve_simple(head, scope)
            return f"{base}.{rest}" if base else None
        return self._resolve_simple(name, scope)

    def _resolve_simple(self, name: str, scope: str | None) -> str | None:
        if name in self.type_vars:
            return None
        # enclosing scopes, innermost first
        s = scope
        while s:
            cand = f"{s}.{name}"
            if cand in self.local_types.get(name, ()) or self.index.contains(cand):
                return cand
            s = s.rsplit(".", 1)[0] if "." in s else None
        local = self.local_types.get(name)
        if local:
            return min(local, key=len)
        if name in self.single_imports:
            return self.single_imports[name]
        cand = f"{self.package}.{name}" if self.package else name
        if self.index.contains(cand):
            return cand
        platform_wild = []
        other_wild = []
        for w in self.wildcards:
            if self.index.is_platform(w + "."):
                platform_wild.append(w)
            else:
                other_wild.append(w)
                if self.index.contains(f"{w}.{name}"):
                    return f"{w}.{name}"
        if name in JAVA_LANG_TYPES:
            return f"java.lang.{name}"
        for w in platform_wild:
            if name in PACKAGE_TYPES.get(w, ()):
                return f"{w}.{name}"
        if len(platform_wild) == 1 and not other_wild:
            return f"{platform_wild[0]}.{name}"
        return None

    def is_known(self, qualified: str | None) -> bool:
        return self.index.is_known(qualified)

    # -- expressions ----------------------------------------------------------
    def resolve_field_path(self, path: str, scope: str | None) -> str | None:
        """Resolve ``Type.FIELD`` style paths; variable-headed paths return None."""
        head = path.split(".", 1)[0]
        if head == "this" or head in self.vars:
            return None
        segs = path.split(".")
        for i in range(len(segs) - 1, 0, -1):
            t = self.resolve_type(".".join(segs[:i]), scope)
            if t is not None:
                return ".".join([t] + segs[i:])
        return None

    def variable_type(self, name: str, offset: int) -> str | None:
        decls = self.vars.get(name)
        if not decls:
            return None
        before = [d for d in decls if d[0] <= offset]
        offset_, type_name, scope = max(before) if before else min(decls)
        return self.resolve_type(type_name, scope)

    def receiver_type(self, call, depth: int = 0) -> str | None:
        """Static type of the receiver of a METHOD_CALL fact, or None if unknown."""
        if depth > 32:
            return None
        desc = call.payload or "expr"
        tag, _, rest = desc.partition(":")
        if tag in ("implicit", "this"):
            return call.scope
        if tag == "var":
            return self.variable_type(rest, call.offset)
        if tag in ("type", "typed"):
            return self.resolve_type(rest, call.scope)
        if tag == "lit":
            return "java.lang.String"
        if tag == "path":
            full = self.resolve_field_path(rest, call.scope)
            if full is None:
                return None
            if full in STATIC_FIELD_TYPES:
                return STATIC_FIELD_TYPES[full]
            return full if self.index.is_known(full) and self._is_type(full) else None
        if tag == "call":
            inner = self.calls.get(int(rest))
            if inner is None:
                return None
            recv = self.receiver_type(inner, depth + 1)
            return return_type(recv, inner.name) if recv else None
        return None

    def _is_type(self, qualified: str) -> bool:
        if self.index.contains(qualified):
            return True
        pkg, _, simple = qualified.rpartition(".")
        return simple in PACKAGE_TYPES.get(pkg, ())
