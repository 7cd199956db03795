"""On-disk formats.

Key files are JSON text: format_version, role, r, D_max, moduli (decimal
strings), ``e_table`` (base64 of little-endian float64, row-major D_max x r)
and, for private keys only, ``secret_seed`` as 64 hex characters.

Ciphertext files are binary::

    b"ZSGL" | u16 version | u16 r | u32 D | 32-byte message seed | D*r float64

all little-endian, so the length is exactly 44 + 8*D*r bytes.
"""

from __future__ import annotations

import base64
import binascii
import json
import struct

import numpy as np

from .errors import FormatError
from .manifold import TorusModel
from .scheme import FORMAT_VERSION, CiphertextMessage, KeyPair, PublicKey

MAGIC = b"ZSGL"
HEADER = struct.Struct("<4sHHI32s")
assert HEADER.size == 44


def _public_fields(pub: PublicKey, role: str) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "role": role,
        "r": pub.model.r,
        "D_max": pub.max_blocks,
        "moduli": [repr(m) for m in pub.model.moduli],
        "e_table": base64.b64encode(np.ascontiguousarray(pub.keys, dtype="<f8").tobytes()).decode("ascii"),
    }


def dump_public_key(pub: PublicKey) -> str:
    return json.dumps(_public_fields(pub, "public"), indent=2) + "\n"


def dump_private_key(key: KeyPair) -> str:
    doc = _public_fields(key.public, "private")
    doc["secret_seed"] = key.secret_seed.hex()
    return json.dumps(doc, indent=2) + "\n"


def _parse_public(doc: dict) -> PublicKey:
    try:
        if doc["format_version"] != FORMAT_VERSION:
            raise FormatError(f"unsupported key format version {doc['format_version']!r}")
        r, d_max = int(doc["r"]), int(doc["D_max"])
        model = TorusModel(r, tuple(float(m) for m in doc["moduli"]))
        raw = base64.b64decode(doc["e_table"], validate=True)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, binascii.Error) as exc:
        raise FormatError(f"malformed key file: {exc}") from exc
    if len(raw) != 8 * r * d_max:
        raise FormatError(f"e_table holds {len(raw)} bytes, expected {8 * r * d_max}")
    try:
        return PublicKey(model, np.frombuffer(raw, dtype="<f8").reshape(d_max, r))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def _load_doc(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"key file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("key file must hold a JSON object")
    return doc


def load_public_key(text: str) -> PublicKey:
    """Parse a public or private key file, returning its public part."""
    return _parse_public(_load_doc(text))


def load_private_key(text: str) -> KeyPair:
    doc = _load_doc(text)
    if doc.get("role") != "private":
        raise FormatError("not a private key file")
    pub = _parse_public(doc)
    try:
        seed = bytes.fromhex(doc["secret_seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad secret_seed: {exc}") from exc
    if len(seed) != 32:
        raise FormatError("secret_seed must be 64 hex characters")
    return KeyPair(pub, seed)


def dump_ciphertext(ct: CiphertextMessage) -> bytes:
    header = HEADER.pack(MAGIC, ct.version, ct.r, ct.D, ct.message_seed)
    return header + np.ascontiguousarray(ct.blocks, dtype="<f8").tobytes()


def load_ciphertext(data: bytes) -> CiphertextMessage:
    if len(data) < HEADER.size:
        raise FormatError(f"ciphertext shorter than its {HEADER.size}-byte header")
    magic, version, r, count, seed = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("bad magic bytes")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported ciphertext version {version}")
    expected = HEADER.size + 8 * count * r
    if len(data) != expected:
        raise FormatError(f"ciphertext is {len(data)} bytes, header implies {expected}")
    try:
        return CiphertextMessage(r, seed, np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(count, r))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
