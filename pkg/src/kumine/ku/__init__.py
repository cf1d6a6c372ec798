"""Java knowledge-unit detection."""

from .detect import Detector, KuVector, detect_kus, vector_sum
from .facts import Fact, FactStream, NodeKind, ParseError, parse_source
from .rules import KU_IDS, KuRule, default_ruleset, dump_ruleset, load_ruleset
from .symbols import SymbolIndex, build_symbol_index

__all__ = [
    "Detector", "Fact", "FactStream", "KU_IDS", "KuRule", "KuVector", "NodeKind", "ParseError",
    "SymbolIndex", "build_symbol_index", "default_ruleset", "detect_kus", "dump_ruleset",
    "load_ruleset", "parse_source", "vector_sum",
]
