"""Count KU occurrences in a fact stream."""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from .facts import REFERENCE_KINDS, Fact, FactStream, NodeKind, ParseError, parse_source
from .rules import KU_IDS, N_KUS, KuRule, default_ruleset
from .symbols import FileResolver, SymbolIndex, declared_types

log = logging.getLogger(__name__)

_TYPE_REF_KINDS = frozenset({NodeKind.TYPE_REF, NodeKind.EXTENDS_REF, NodeKind.IMPLEMENTS_REF, NodeKind.THROWS_REF})


@dataclass(frozen=True)
class KuVector:
    """Immutable vector of 28 non-negative counts, K1..K28."""

    counts: tuple[float, ...] = (0,) * N_KUS

    def __post_init__(self):
        if len(self.counts) != N_KUS:
            raise ValueError(f"KuVector needs {N_KUS} entries, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValueError("KuVector entries must be non-negative")

    @classmethod
    def zeros(cls) -> KuVector:
        return cls()

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> KuVector:
        return cls(tuple(values.get(k, 0) for k in KU_IDS))

    def __add__(self, other: KuVector) -> KuVector:
        return KuVector(tuple(a + b for a, b in zip(self.counts, other.counts)))

    def __getitem__(self, ku: str | int) -> float:
        if isinstance(ku, str):
            return self.counts[int(ku.lstrip("K")) - 1]
        return self.counts[ku]

    def __iter__(self):
        return iter(self.counts)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(KU_IDS, self.counts))

    def nonzero(self) -> dict[str, float]:
        return {k: v for k, v in self.as_dict().items() if v}

    def to_csv_row(self) -> str:
        return ",".join(_fmt(c) for c in self.counts)

    @staticmethod
    def csv_header() -> str:
        return ",".join(KU_IDS)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def vector_sum(vectors: Iterable[KuVector]) -> KuVector:
    acc = [0] * N_KUS
    for v in vectors:
        for i, c in enumerate(v.counts):
            acc[i] += c
    return KuVector(tuple(acc))


# -- matching -----------------------------------------------------------------

class _FactContext:
    """Lazily computed resolution results for one fact."""

    __slots__ = ("fact", "resolver", "_name", "_recv")
    _UNSET = object()

    def __init__(self, fact: Fact, resolver: FileResolver):
        self.fact = fact
        self.resolver = resolver
        self._name = self._UNSET
        self._recv = self._UNSET

    @property
    def resolved(self) -> str | None:
        if self._name is self._UNSET:
            f = self.fact
            if f.kind is NodeKind.FIELD_ACCESS:
                self._name = self.resolver.resolve_field_path(f.name, f.scope) if f.name else None
            else:
                self._name = self.resolver.resolve_type(f.name, f.scope)
        return self._name

    @property
    def receiver(self) -> str | None:
        if self._recv is self._UNSET:
            self._recv = self.resolver.receiver_type(self.fact)
        return self._recv

    def known(self, name: str | None) -> bool:
        return self.resolver.is_known(name)


def _any(required, present) -> bool:
    return required is None or bool(required & present)


def _name_matches(name: str, params, index: SymbolIndex) -> bool:
    names = params.get("names")
    if names is not None and name in names:
        return True
    prefixes = params.get("prefixes")
    if prefixes is not None and name.startswith(prefixes):
        return True
    kinds = params.get("project_kinds")
    if kinds is not None and index.kind_of(name) in kinds:
        return True
    return False


def rule_matches(rule: KuRule, ctx: _FactContext) -> bool:
    m = rule.matcher
    p = m.params
    f = ctx.fact
    kind = m.kind
    if kind == "node_kind" or kind == "modifier":
        if f.kind not in p["kinds"]:
            return False
        if kind == "modifier":
            if not (p["modifiers"] & f.modifiers):
                return False
        else:
            if p.get("payloads") is not None and f.payload not in p["payloads"]:
                return False
            if not _any(p.get("tags"), f.tags):
                return False
        # construct rules over reference facts still honour third-party exclusion
        if f.kind in REFERENCE_KINDS and f.name is not None and not ctx.known(ctx.resolved):
            return False
        if f.kind is NodeKind.POLY_ASSIGN and not ctx.known(ctx.resolver.resolve_type(f.payload, f.scope)):
            return False
        return True
    if kind == "type_reference":
        kinds = p.get("kinds") or _TYPE_REF_KINDS
        if f.kind not in kinds or not _any(p.get("tags"), f.tags):
            return False
        name = ctx.resolved
        return ctx.known(name) and _name_matches(name, p, ctx.resolver.index)
    if kind == "annotation":
        if f.kind is not NodeKind.ANNOTATION:
            return False
        name = ctx.resolved
        return ctx.known(name) and _name_matches(name, p, ctx.resolver.index)
    if kind == "method_invocation":
        if f.kind is not NodeKind.METHOD_CALL:
            return False
        methods = p.get("methods")
        if methods is not None and f.name not in methods:
            return False
        receivers = p.get("receivers")
        prefixes = p.get("receiver_prefixes")
        if receivers is None and prefixes is None:
            return True
        recv = ctx.receiver
        if not ctx.known(recv):
            return False
        return (receivers is not None and recv in receivers) or (prefixes is not None and recv.startswith(prefixes))
    raise ValueError(f"unknown matcher kind {kind!r}")


def _group(rules: Sequence[KuRule]) -> dict[NodeKind | None, list[KuRule]]:
    """Bucket rules by the fact kinds they can possibly match (None = any kind)."""
    buckets: dict[NodeKind | None, list[KuRule]] = {}
    for r in rules:
        m = r.matcher
        if m.kind in ("node_kind", "modifier"):
            kinds = m.params["kinds"]
        elif m.kind == "type_reference":
            kinds = m.params.get("kinds") or _TYPE_REF_KINDS
        elif m.kind == "annotation":
            kinds = {NodeKind.ANNOTATION}
        else:
            kinds = {NodeKind.METHOD_CALL}
        for k in kinds:
            buckets.setdefault(k, []).append(r)
    return buckets


def detect_kus(facts: FactStream, index: SymbolIndex, rules: Sequence[KuRule] | None = None) -> KuVector:
    """Count KU occurrences: one per (fact, capability) match."""
    rules = default_ruleset() if rules is None else rules
    if not facts.facts:
        return KuVector.zeros()
    buckets = _group(rules)
    resolver = FileResolver(facts, index)
    counts = [0] * N_KUS
    for fact in facts.facts:
        candidates = buckets.get(fact.kind)
        if not candidates:
            continue
        ctx = _FactContext(fact, resolver)
        seen: set[str] = set()
        for rule in candidates:
            if rule.capability_id in seen:
                continue
            if rule_matches(rule, ctx):
                seen.add(rule.capability_id)
                counts[rule.ku_index] += 1
    return KuVector(tuple(counts))


# -- cached detection over snapshots --------------------------------------------

class _RecordingIndex:
    """SymbolIndex stand-in that logs every project lookup it answers."""

    def __init__(self, inner: SymbolIndex):
        self._inner = inner
        self.platform_prefixes = inner.platform_prefixes
        self.log: dict[tuple[str, str], object] = {}

    def contains(self, name: str) -> bool:
        ans = self._inner.contains(name)
        self.log[("c", name)] = ans
        return ans

    def kind_of(self, name: str) -> str | None:
        ans = self._inner.kind_of(name)
        self.log[("k", name)] = ans
        return ans

    def is_platform(self, name: str) -> bool:
        return self._inner.is_platform(name)

    def is_known(self, name: str | None) -> bool:
        return name is not None and (self.contains(name) or self.is_platform(name))


def _replay(log: Mapping[tuple[str, str], object], index: SymbolIndex) -> bool:
    for (op, name), ans in log.items():
        got = index.contains(name) if op == "c" else index.kind_of(name)
        if got != ans:
            return False
    return True


class Detector:
    """Parse/detect with content-addressed caches.

    Detection results are reused when the same file content is seen against
    an index that answers every lookup the earlier detection performed in
    the same way, so reuse is exact.
    """

    def __init__(self, rules: Sequence[KuRule] | None = None,
                 platform_prefixes: tuple[str, ...] | None = None):
        self.rules = list(default_ruleset() if rules is None else rules)
        self.platform_prefixes = platform_prefixes
        self._parsed: dict[str, FactStream | None] = {}
        self._declared: dict[str, dict[str, str]] = {}
        self._detected: dict[tuple, list[tuple[dict, KuVector]]] = {}
        self.warnings: list[str] = []

    @staticmethod
    def digest(text: str) -> str:
        return hashlib.sha1(text.encode("utf-8", "surrogatepass")).hexdigest()

    def parse(self, text: str, path: str | None = None) -> FactStream | None:
        key = self.digest(text)
        if key not in self._parsed:
            try:
                stream = parse_source(text, path)
            except ParseError as exc:
                msg = f"skipping unparseable file {path}: {exc.message} at byte {exc.offset}"
                log.warning(msg)
                self.warnings.append(msg)
                stream = None
            except UnicodeError as exc:
                msg = f"skipping non-UTF-8 file {path}: {exc}"
                log.warning(msg)
                self.warnings.append(msg)
                stream = None
            self._parsed[key] = stream
            self._declared[key] = declared_types(stream) if stream is not None else {}
        return self._parsed[key]

    def index_for(self, files: Mapping[str, str]) -> SymbolIndex:
        kinds: dict[str, str] = {}
        for path in sorted(files):
            self.parse(files[path], path)
            kinds.update(self._declared[self.digest(files[path])])
        if self.platform_prefixes is None:
            return SymbolIndex(frozenset(kinds), type_kinds=kinds)
        return SymbolIndex(frozenset(kinds), tuple(self.platform_prefixes), kinds)

    def detect_text(self, text: str, index: SymbolIndex, path: str | None = None) -> KuVector:
        stream = self.parse(text, path)
        if stream is None:
            return KuVector.zeros()
        key = (self.digest(text), tuple(index.platform_prefixes))
        for qlog, vec in self._detected.get(key, ()):
            if _replay(qlog, index):
                return vec
        rec = _RecordingIndex(index)
        vec = detect_kus(stream, rec, self.rules)  # type: ignore[arg-type]
        self._detected.setdefault(key, []).append((rec.log, vec))
        return vec

    def detect_snapshot(self, files: Mapping[str, str], paths: Iterable[str] | None = None,
                        index: SymbolIndex | None = None) -> KuVector:
        """Sum KU vectors over ``paths`` (default: every file) of one snapshot."""
        index = self.index_for(files) if index is None else index
        chosen = sorted(files) if paths is None else [p for p in paths if p in files]
        return vector_sum(self.detect_text(files[p], index, p) for p in chosen)
