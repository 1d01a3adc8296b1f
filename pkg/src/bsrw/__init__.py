"""Exact arithmetic and random-walk diagnostics for Baumslag-Solitar groups."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    BSGroup,
    GroupClass,
    NormalForm,
    Presentation,
    classify,
    invert,
    is_identity,
    multiply,
    parse_word,
)
