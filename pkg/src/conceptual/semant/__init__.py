from .analyzer import Analyzer, analyze
from .typed import TypedModel, dump_typed

__all__ = ["Analyzer", "analyze", "TypedModel", "dump_typed"]
