"""Context-word recovery from ASR decodes via confusion-aware phone matching."""

__version__ = "0.1.0"
