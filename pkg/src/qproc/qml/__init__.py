"""QML, the textual authoring language for quality models."""

from qproc.qml.parser import ParseResult, parse, parse_file
from qproc.qml.serializer import serialize

__all__ = ["ParseResult", "parse", "parse_file", "serialize"]
