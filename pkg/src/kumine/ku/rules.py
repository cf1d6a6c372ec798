"""Declarative KU ruleset.

A rule ties one capability of one knowledge unit to a matcher. Matchers are
plain data (kind + parameters) so rulesets round-trip through YAML:

.. code-block:: yaml

    version: 1
    rules:
      - ku: K4
        capability: K4.C1
        matcher: node_kind
        params: {kinds: [WHILE_STMT]}

Matcher kinds and their parameters (all optional unless stated):

``node_kind``
    ``kinds`` (required), ``payloads``, ``tags`` (any-of).
``modifier``
    ``kinds`` (required), ``modifiers`` (any-of, required).
``type_reference``
    ``kinds`` (default: all reference kinds), ``names``, ``prefixes``,
    ``project_kinds``, ``tags``. Matches a reference whose resolved name is
    listed, starts with a prefix, or is a project type of a listed kind.
``annotation``
    ``names``, ``prefixes``.
``method_invocation``
    ``methods``, ``receivers``, ``receiver_prefixes``. With neither receiver
    parameter the receiver is not inspected at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Any

import yaml

from .facts import NodeKind

N_KUS = 28
KU_IDS = tuple(f"K{i}" for i in range(1, N_KUS + 1))
MATCHER_KINDS = ("node_kind", "modifier", "type_reference", "annotation", "method_invocation")
RULESET_VERSION = 1

_LIST_PARAMS = {"kinds", "payloads", "tags", "modifiers", "names", "prefixes",
                "project_kinds", "methods", "receivers", "receiver_prefixes"}


class RulesetError(ValueError):
    pass


@dataclass(frozen=True)
class Matcher:
    kind: str
    params: MappingProxyType

    def get(self, key: str):
        return self.params.get(key)


@dataclass(frozen=True)
class KuRule:
    ku_id: str
    capability_id: str
    matcher: Matcher

    @property
    def ku_index(self) -> int:
        return int(self.ku_id[1:]) - 1


def make_rule(ku: str, capability: str, matcher: str, **params: Any) -> KuRule:
    if ku not in KU_IDS:
        raise RulesetError(f"unknown KU id {ku!r}")
    if not capability.startswith(ku + "."):
        raise RulesetError(f"capability {capability!r} does not belong to {ku}")
    if matcher not in MATCHER_KINDS:
        raise RulesetError(f"unknown matcher kind {matcher!r}")
    clean = {}
    for key, value in params.items():
        if key not in _LIST_PARAMS:
            raise RulesetError(f"{capability}: unknown parameter {key!r}")
        if value is None:
            continue
        if isinstance(value, str):
            value = [value]
        if key == "kinds":
            try:
                value = [NodeKind(v) for v in value]
            except ValueError as exc:
                raise RulesetError(f"{capability}: {exc}") from None
        clean[key] = frozenset(value) if key != "prefixes" and key != "receiver_prefixes" else tuple(value)
    if matcher in ("node_kind", "modifier") and "kinds" not in clean:
        raise RulesetError(f"{capability}: matcher {matcher} needs 'kinds'")
    if matcher == "modifier" and "modifiers" not in clean:
        raise RulesetError(f"{capability}: modifier matcher needs 'modifiers'")
    return KuRule(ku, capability, Matcher(matcher, MappingProxyType(clean)))


# -- default ruleset ----------------------------------------------------------

def _ee(*suffixes: str) -> list[str]:
    return [f"{root}.{s}" for s in suffixes for root in ("javax", "jakarta")]


def _q(pkg: str, names: str) -> list[str]:
    return [f"{pkg}.{n}" for n in names.split()]


_COLLECTION_TYPES = _q("java.util", "List ArrayList LinkedList Collection Iterable Set HashSet "
                                    "LinkedHashSet TreeSet Queue Deque ArrayDeque")
_STREAMS = ["java.util.stream."]
_PRIMITIVE_FUNCTIONAL = _q("java.util.function", """IntFunction LongFunction DoubleFunction IntPredicate
    LongPredicate DoublePredicate IntConsumer LongConsumer DoubleConsumer IntSupplier LongSupplier
    DoubleSupplier BooleanSupplier IntUnaryOperator LongUnaryOperator DoubleUnaryOperator
    IntBinaryOperator LongBinaryOperator DoubleBinaryOperator ToIntFunction ToLongFunction
    ToDoubleFunction ToIntBiFunction ToLongBiFunction ToDoubleBiFunction IntToLongFunction
    IntToDoubleFunction LongToIntFunction LongToDoubleFunction DoubleToIntFunction
    DoubleToLongFunction ObjIntConsumer ObjLongConsumer ObjDoubleConsumer""")
_BINARY_FUNCTIONAL = _q("java.util.function", """BiFunction BiConsumer BiPredicate BinaryOperator
    ToIntBiFunction ToLongBiFunction ToDoubleBiFunction IntBinaryOperator LongBinaryOperator
    DoubleBinaryOperator""")
_COMMON_EXCEPTIONS = _q("java.lang", """Throwable Exception RuntimeException Error NullPointerException
    ArithmeticException ArrayIndexOutOfBoundsException IndexOutOfBoundsException
    StringIndexOutOfBoundsException ClassCastException IllegalArgumentException
    IllegalStateException NumberFormatException UnsupportedOperationException
    InterruptedException""") + _q("java.io", "IOException FileNotFoundException UncheckedIOException")
_THROWABLE_BASES = _q("java.lang", "Throwable Exception RuntimeException Error") + ["java.io.IOException"]
_IO_CLASSES = _q("java.io", """BufferedReader BufferedWriter File FileReader FileWriter FileInputStream
    FileOutputStream ObjectOutputStream ObjectInputStream PrintWriter InputStreamReader
    OutputStreamWriter""")
_STRING_SEARCH = """indexOf lastIndexOf substring split contains startsWith endsWith charAt trim strip
    replace replaceAll toUpperCase toLowerCase length isEmpty isBlank matches concat join compareTo
    equalsIgnoreCase toCharArray chars""".split()
_BOXED = _q("java.lang", "Integer Long Double Float Short Byte Boolean")
_JDBC = _q("java.sql", "Driver DriverManager Connection Statement PreparedStatement CallableStatement "
                       "ResultSet") + ["javax.sql.DataSource"]
_JDBC_CALLS = """executeQuery executeUpdate execute createStatement prepareStatement prepareCall next
    close getString getInt getLong getDouble getBoolean getDate getTimestamp getObject
    getConnection setString setInt setLong""".split()


def _rules() -> list[KuRule]:
    R = make_rule
    decls = ["LOCAL_VAR_DECL", "FIELD_DECL", "PARAMETER"]
    return [
        # K1 data types
        R("K1", "K1.C1", "node_kind", kinds=["LOCAL_VAR_DECL", "FIELD_DECL"]),
        R("K1", "K1.C1", "node_kind", kinds=["CAST"], tags=["primitive"]),
        # K2 operators and decisions
        R("K2", "K2.C1", "node_kind", kinds=["ASSIGNMENT", "UPDATE_OP", "UNARY_OP", "BINARY_OP", "PARENTHESIZED"]),
        R("K2", "K2.C2", "node_kind", kinds=["BINARY_OP"], payloads=["==", "!="]),
        R("K2", "K2.C2", "method_invocation", methods=["equals"]),
        R("K2", "K2.C3", "node_kind", kinds=["IF_STMT", "TERNARY"]),
        R("K2", "K2.C4", "node_kind", kinds=["SWITCH"]),
        # K3 arrays
        R("K3", "K3.C1", "node_kind", kinds=["ARRAY_CREATION", "ARRAY_INITIALIZER", "ARRAY_ACCESS"] + decls, tags=["dim1"]),
        R("K3", "K3.C2", "node_kind", kinds=["ARRAY_CREATION", "ARRAY_INITIALIZER", "ARRAY_ACCESS"] + decls, tags=["dimN"]),
        # K4 loops
        R("K4", "K4.C1", "node_kind", kinds=["WHILE_STMT"]),
        R("K4", "K4.C2", "node_kind", kinds=["FOR_STMT", "ENHANCED_FOR_STMT"]),
        R("K4", "K4.C3", "node_kind", kinds=["DO_STMT"]),
        R("K4", "K4.C4", "node_kind", kinds=["BREAK_STMT"]),
        R("K4", "K4.C5", "node_kind", kinds=["CONTINUE_STMT"]),
        # K5 methods and encapsulation
        R("K5", "K5.C1", "node_kind", kinds=["METHOD_DECL"], tags=["has_params", "returns_value"]),
        R("K5", "K5.C2", "modifier", kinds=["METHOD_DECL", "FIELD_DECL"], modifiers=["static"]),
        R("K5", "K5.C2", "node_kind", kinds=["STATIC_INITIALIZER"]),
        R("K5", "K5.C3", "node_kind", kinds=["METHOD_DECL", "CONSTRUCTOR_DECL"], tags=["overloaded"]),
        R("K5", "K5.C4", "node_kind", kinds=["CONSTRUCTOR_CALL"], payloads=["this"]),
        R("K5", "K5.C5", "node_kind", kinds=["METHOD_DECL", "CONSTRUCTOR_DECL"], tags=["varargs"]),
        R("K5", "K5.C6", "node_kind", kinds=["MODIFIER"], payloads=["public", "protected", "private"]),
        R("K5", "K5.C7", "node_kind", kinds=["METHOD_DECL"], tags=["getter", "setter"]),
        R("K5", "K5.C8", "node_kind", kinds=["CLASS_DECL"], tags=["immutable"]),
        # K6 inheritance
        R("K6", "K6.C1", "node_kind", kinds=["POLY_ASSIGN"]),
        R("K6", "K6.C1", "node_kind", kinds=["EXTENDS_REF"]),
        R("K6", "K6.C2", "type_reference", kinds=["TYPE_REF"], tags=["param_type"],
          project_kinds=["interface", "abstract_class"]),
        R("K6", "K6.C3", "annotation", names=["java.lang.Override"]),
        R("K6", "K6.C4", "modifier", kinds=["CLASS_DECL", "METHOD_DECL"], modifiers=["abstract"]),
        R("K6", "K6.C5", "node_kind", kinds=["INTERFACE_DECL", "IMPLEMENTS_REF"]),
        R("K6", "K6.C6", "node_kind", kinds=["CONSTRUCTOR_CALL"], payloads=["super"]),
        R("K6", "K6.C6", "node_kind", kinds=["SUPER_ACCESS"]),
        R("K6", "K6.C7", "node_kind", kinds=["CAST"], tags=["reference"]),
        # K7 advanced class design
        R("K7", "K7.C1", "node_kind", kinds=["CLASS_DECL", "INTERFACE_DECL", "ENUM_DECL", "RECORD_DECL"],
          tags=["nested", "local"]),
        R("K7", "K7.C1", "node_kind", kinds=["ANONYMOUS_CLASS"]),
        R("K7", "K7.C2", "node_kind", kinds=["MODIFIER"], payloads=["final"]),
        R("K7", "K7.C3", "node_kind", kinds=["ENUM_DECL"]),
        R("K7", "K7.C3", "node_kind", kinds=["METHOD_DECL", "CONSTRUCTOR_DECL"], tags=["in_enum"]),
        R("K7", "K7.C4", "node_kind", kinds=["CLASS_DECL"], tags=["singleton", "immutable"]),
        # K8 generics and collections
        R("K8", "K8.C1", "node_kind", kinds=["CLASS_DECL", "INTERFACE_DECL"], tags=["generic"]),
        R("K8", "K8.C1", "type_reference", kinds=["TYPE_REF"], tags=["type_arg"], prefixes=[""]),
        R("K8", "K8.C2", "type_reference", names=_q("java.util", "ArrayList TreeSet TreeMap ArrayDeque")),
        R("K8", "K8.C3", "type_reference", names=["java.util.Comparator", "java.lang.Comparable"]),
        R("K8", "K8.C4", "method_invocation", methods=["forEach"], receivers=_COLLECTION_TYPES),
        # K9 functional interfaces
        R("K9", "K9.C1", "type_reference", names=_q("java.util.function", "Predicate Consumer Function Supplier")),
        R("K9", "K9.C2", "type_reference", names=_PRIMITIVE_FUNCTIONAL),
        R("K9", "K9.C3", "type_reference", names=_BINARY_FUNCTIONAL),
        R("K9", "K9.C4", "type_reference", names=["java.util.function.UnaryOperator"]),
        # K10 streams
        R("K10", "K10.C1", "method_invocation", receiver_prefixes=_STREAMS,
          methods=["peek", "map", "mapToInt", "mapToLong", "mapToDouble", "mapToObj"]),
        R("K10", "K10.C2", "method_invocation", receiver_prefixes=_STREAMS,
          methods=["findFirst", "findAny", "anyMatch", "allMatch", "noneMatch"]),
        R("K10", "K10.C3", "type_reference", names=_q("java.util", "Optional OptionalInt OptionalLong OptionalDouble")),
        R("K10", "K10.C3", "method_invocation", receiver_prefixes=["java.util.Optional"]),
        R("K10", "K10.C4", "method_invocation", receiver_prefixes=_STREAMS,
          methods=["count", "sum", "average", "min", "max", "reduce", "summaryStatistics"]),
        R("K10", "K10.C5", "method_invocation", receiver_prefixes=_STREAMS, methods=["sorted"]),
        R("K10", "K10.C6", "method_invocation", receiver_prefixes=_STREAMS, methods=["collect"]),
        R("K10", "K10.C7", "method_invocation", receiver_prefixes=_STREAMS,
          methods=["flatMap", "flatMapToInt", "flatMapToLong", "flatMapToDouble"]),
        # K11 exceptions
        R("K11", "K11.C1", "node_kind", kinds=["TRY_STMT"]),
        R("K11", "K11.C2", "node_kind", kinds=["CATCH_CLAUSE", "FINALLY_CLAUSE"]),
        R("K11", "K11.C3", "node_kind", kinds=["TRY_WITH_RESOURCES"]),
        R("K11", "K11.C4", "type_reference", kinds=["EXTENDS_REF"], names=_THROWABLE_BASES),
        R("K11", "K11.C4", "type_reference", kinds=["IMPLEMENTS_REF"],
          names=["java.lang.AutoCloseable", "java.io.Closeable"]),
        R("K11", "K11.C5", "node_kind", kinds=["THROW_STMT"]),
        R("K11", "K11.C5", "node_kind", kinds=["METHOD_DECL", "CONSTRUCTOR_DECL"], tags=["throws"]),
        R("K11", "K11.C6", "type_reference", names=_COMMON_EXCEPTIONS),
        R("K11", "K11.C7", "node_kind", kinds=["ASSERT_STMT"]),
        # K12 date/time
        R("K12", "K12.C1", "type_reference",
          names=_q("java.time", "LocalDate LocalTime LocalDateTime Instant Period Duration")),
        R("K12", "K12.C2", "type_reference", prefixes=["java.time.format."],
          names=_q("java.time", "ZoneId ZoneOffset ZonedDateTime OffsetDateTime")),
        R("K12", "K12.C3", "type_reference", prefixes=["java.time.temporal."]),
        R("K12", "K12.C4", "method_invocation",
          receivers=_q("java.time", "LocalDate LocalTime LocalDateTime Period") + ["java.time.format.DateTimeFormatter"]),
        # K13 io
        R("K13", "K13.C1", "type_reference", kinds=["FIELD_ACCESS"], names=_q("java.lang.System", "out err in")),
        R("K13", "K13.C1", "type_reference", names=["java.io.Console", "java.util.Scanner"]),
        R("K13", "K13.C2", "type_reference", names=_IO_CLASSES),
        # K14 nio
        R("K14", "K14.C1", "type_reference", names=["java.nio.file.Path", "java.nio.file.Paths"]),
        R("K14", "K14.C1", "method_invocation", receivers=["java.nio.file.Path"]),
        R("K14", "K14.C2", "type_reference", names=["java.nio.file.Files"], prefixes=["java.nio.file.attribute."]),
        # K15 strings
        R("K15", "K15.C1", "method_invocation", receivers=["java.lang.String"], methods=_STRING_SEARCH),
        R("K15", "K15.C1", "method_invocation", receivers=_BOXED,
          methods=["parseInt", "parseLong", "parseDouble", "parseFloat", "parseShort", "parseByte", "parseBoolean"]),
        R("K15", "K15.C2", "type_reference", names=["java.lang.StringBuilder", "java.lang.StringBuffer"]),
        R("K15", "K15.C2", "method_invocation", receivers=["java.lang.StringBuilder", "java.lang.StringBuffer"]),
        R("K15", "K15.C3", "type_reference", prefixes=["java.util.regex."]),
        R("K15", "K15.C3", "method_invocation", receiver_prefixes=["java.util.regex."]),
        R("K15", "K15.C4", "method_invocation", receivers=["java.lang.String"], methods=["format"]),
        R("K15", "K15.C4", "method_invocation", receivers=["java.io.PrintStream", "java.io.PrintWriter"],
          methods=["printf", "format"]),
        R("K15", "K15.C4", "type_reference",
          names=["java.util.Formatter", "java.text.NumberFormat", "java.text.DecimalFormat"]),
        # K16 concurrency
        R("K16", "K16.C1", "type_reference", names=["java.lang.Runnable", "java.lang.Thread"] + _q(
            "java.util.concurrent", "Callable Executor ExecutorService Executors Future CompletableFuture")),
        R("K16", "K16.C2", "node_kind", kinds=["SYNCHRONIZED_STMT"]),
        R("K16", "K16.C2", "node_kind", kinds=["MODIFIER"], payloads=["synchronized"]),
        R("K16", "K16.C2", "type_reference", prefixes=["java.util.concurrent.atomic.", "java.util.concurrent.locks."]),
        R("K16", "K16.C3", "type_reference", prefixes=["java.util.concurrent."]),
        R("K16", "K16.C4", "type_reference",
          names=_q("java.util.concurrent", "ForkJoinPool ForkJoinTask RecursiveTask RecursiveAction")),
        # K17 jdbc
        R("K17", "K17.C1", "type_reference", names=_JDBC),
        R("K17", "K17.C2", "method_invocation", receiver_prefixes=["java.sql.", "javax.sql."], methods=_JDBC_CALLS),
        # K18 localization
        R("K18", "K18.C1", "type_reference", names=["java.util.Locale"]),
        R("K18", "K18.C1", "method_invocation", receivers=["java.util.Locale"]),
        R("K18", "K18.C2", "type_reference",
          names=_q("java.util", "ResourceBundle ListResourceBundle PropertyResourceBundle")),
        R("K18", "K18.C2", "method_invocation", receivers=["java.util.ResourceBundle"]),
        # K19 persistence
        R("K19", "K19.C1", "annotation", prefixes=[p + "." for p in _ee("persistence")]),
        R("K19", "K19.C2", "type_reference", names=[f"{p}.{n}" for p in _ee("persistence") for n in
                                                   "EntityManager EntityManagerFactory EntityTransaction "
                                                   "Persistence LockModeType".split()]),
        R("K19", "K19.C2", "method_invocation", receivers=[f"{p}.{n}" for p in _ee("persistence")
                                                           for n in ("EntityManager", "EntityTransaction")]),
        R("K19", "K19.C3", "type_reference", names=[f"{p}.{n}" for p in _ee("persistence") for n in ("Query", "TypedQuery")]),
        R("K19", "K19.C3", "annotation", names=[f"{p}.{n}" for p in _ee("persistence") for n in ("NamedQuery", "NamedQueries")]),
        # K20 enterprise beans
        R("K20", "K20.S1", "annotation", prefixes=[p + "." for p in _ee("ejb", "interceptor")]),
        R("K20", "K20.S1", "type_reference", prefixes=[p + "." for p in _ee("ejb", "interceptor")]),
        R("K20", "K20.S2", "type_reference", names=[f"{p}.{n}" for p in _ee("ejb") for n in
                                                   ("Timer", "TimerService", "TimerConfig", "ScheduleExpression")]),
        R("K20", "K20.S2", "annotation", names=[f"{p}.{n}" for p in _ee("ejb") for n in ("Schedule", "Timeout")]),
        # K21 messaging
        R("K21", "K21.S1", "type_reference", prefixes=[p + "." for p in _ee("jms")]),
        R("K21", "K21.S1", "annotation", names=[f"{p}.MessageDriven" for p in _ee("ejb")]),
        R("K21", "K21.S2", "method_invocation", receivers=[f"{p}.{n}" for p in _ee("jms") for n in ("Session", "JMSContext")],
          methods=["commit", "rollback", "recover"]),
        # K22 soap
        R("K22", "K22.S1", "annotation", prefixes=[p + "." for p in _ee("jws", "xml.ws")]),
        R("K22", "K22.S1", "type_reference", prefixes=[p + "." for p in _ee("jws", "xml.ws")]),
        R("K22", "K22.S2", "annotation", prefixes=[p + "." for p in _ee("xml.bind")]),
        R("K22", "K22.S2", "type_reference", prefixes=[p + "." for p in _ee("xml.bind")]),
        # K23 servlets
        R("K23", "K23.S1", "type_reference", names=[f"{p}.{n}" for p in _ee("servlet.http") for n in
                                                   ("HttpServlet", "HttpServletRequest", "HttpServletResponse")]
          + [f"{p}.Servlet" for p in _ee("servlet")]),
        R("K23", "K23.S1", "annotation", names=[f"{p}.WebServlet" for p in _ee("servlet.annotation")]),
        R("K23", "K23.S2", "type_reference", names=[f"{p}.Cookie" for p in _ee("servlet.http")]),
        R("K23", "K23.S2", "method_invocation", receivers=[f"{p}.{n}" for p in _ee("servlet.http") for n in
                                                           ("HttpServletRequest", "HttpServletResponse")],
          methods="getHeader getHeaders getHeaderNames setHeader addHeader getParameter getParameterValues "
                  "getParameterMap getCookies addCookie".split()),
        R("K23", "K23.S3", "annotation", names=[f"{p}.{n}" for p in _ee("servlet.annotation") for n in ("WebFilter", "WebListener")]),
        R("K23", "K23.S3", "type_reference", names=[f"{p}.{n}" for p in _ee("servlet") for n in
                                                   ("Filter", "FilterChain", "FilterConfig", "ServletConfig",
                                                    "ServletContextListener")]),
        # K24 rest
        R("K24", "K24.S1", "annotation", prefixes=[p + "." for p in _ee("ws.rs")]),
        R("K24", "K24.S2", "type_reference", prefixes=[p + "." for p in _ee("ws.rs")]),
        # K25 websocket
        R("K25", "K25.S1", "annotation", prefixes=[p + "." for p in _ee("websocket")]),
        R("K25", "K25.S1", "type_reference", names=[f"{p}.{n}" for p in _ee("websocket") for n in ("Endpoint", "Session", "EndpointConfig")]),
        R("K25", "K25.S3", "type_reference", prefixes=[f"{p}.{n}" for p in _ee("websocket") for n in ("Encoder", "Decoder")]),
        # K26 faces
        R("K26", "K26.S1", "annotation", prefixes=[p + "." for p in _ee("faces")]),
        R("K26", "K26.S1", "type_reference", prefixes=[p + "." for p in _ee("faces")]),
        R("K26", "K26.S2", "type_reference", names=[f"{p}.FacesMessage" for p in _ee("faces.application")]),
        R("K26", "K26.S2", "method_invocation", receivers=[f"{p}.FacesContext" for p in _ee("faces.context")],
          methods=["addMessage", "getMessageList", "getViewRoot"]),
        R("K26", "K26.S3", "annotation", names=[f"{p}.Named" for p in _ee("inject")]),
        # K27 cdi
        R("K27", "K27.S1", "annotation", prefixes=[p + "." for p in _ee("inject", "enterprise")]),
        R("K27", "K27.S1", "type_reference", prefixes=[p + "." for p in _ee("enterprise")]),
        # K28 batch
        R("K28", "K28.S1", "annotation", prefixes=[p + "." for p in _ee("batch")]),
        R("K28", "K28.S1", "type_reference", prefixes=[p + "." for p in _ee("batch")]),
    ]


def default_ruleset() -> list[KuRule]:
    """The built-in ruleset: at least one rule per KU, one capability label per rule."""
    return _rules()


# -- serialization ------------------------------------------------------------

def rule_to_dict(rule: KuRule) -> dict:
    params = {}
    for key in sorted(rule.matcher.params):
        value = rule.matcher.params[key]
        if key == "kinds":
            params[key] = sorted(k.value for k in value)
        elif isinstance(value, tuple):
            params[key] = list(value)
        else:
            params[key] = sorted(value)
    return {"ku": rule.ku_id, "capability": rule.capability_id, "matcher": rule.matcher.kind, "params": params}


def dump_ruleset(rules: list[KuRule]) -> str:
    doc = {"version": RULESET_VERSION, "rules": [rule_to_dict(r) for r in rules]}
    return yaml.safe_dump(doc, sort_keys=False, width=120)


def load_ruleset(path: str | Path) -> list[KuRule]:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return parse_ruleset(doc)


def parse_ruleset(doc: Any) -> list[KuRule]:
    if not isinstance(doc, dict) or doc.get("version") != RULESET_VERSION:
        raise RulesetError(f"ruleset must be a mapping with version: {RULESET_VERSION}")
    raw = doc.get("rules")
    if not isinstance(raw, list):
        raise RulesetError("ruleset needs a 'rules' list")
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise RulesetError(f"rule #{i} is not a mapping")
        try:
            out.append(make_rule(entry["ku"], entry["capability"], entry["matcher"], **(entry.get("params") or {})))
        except KeyError as exc:
            raise RulesetError(f"rule #{i} is missing {exc}") from None
    return out


def coverage(rules: list[KuRule]) -> dict[str, set[str]]:
    """KU id -> capability labels present in ``rules``."""
    out: dict[str, set[str]] = {k: set() for k in KU_IDS}
    for r in rules:
        out[r.ku_id].add(r.capability_id)
    return out
