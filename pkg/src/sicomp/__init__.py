"""Compression of binary vectors for a decoder holding a Hamming-close reference."""

from .galois import validate_primitive_table

validate_primitive_table()

from .gel_codec import (  # noqa: E402
    CompressedPayload,
    DecodingError,
    DesignedScheme,
    DesignError,
    SchemeParams,
    design,
    gel_decode,
    gel_encode,
    payload_parse,
    payload_serialize,
)

__all__ = [
    "CompressedPayload",
    "DecodingError",
    "DesignError",
    "DesignedScheme",
    "SchemeParams",
    "design",
    "gel_decode",
    "gel_encode",
    "payload_parse",
    "payload_serialize",
]
__version__ = "0.1.0"
