"""Text <-> positive-integer blocks, one UTF-16 code unit per block.

Block value is code unit + 1 so that U+0000 still maps to a positive integer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedPlaintextError

OFFSET = 1
MAX_BLOCK = 2**17


@dataclass(frozen=True, eq=False)
class MessageBlocks:
    blocks: np.ndarray

    def __post_init__(self):
        arr = np.array(self.blocks, dtype=np.int64).reshape(-1)
        if arr.size and (arr.min() < 1 or arr.max() > MAX_BLOCK):
            raise ValueError(f"blocks must lie in [1, {MAX_BLOCK}]")
        arr.setflags(write=False)
        object.__setattr__(self, "blocks", arr)

    @property
    def D(self) -> int:
        return self.blocks.shape[0]

    def __len__(self) -> int:
        return self.D

    def __eq__(self, other):
        if not isinstance(other, MessageBlocks):
            return NotImplemented
        return np.array_equal(self.blocks, other.blocks)

    def tolist(self) -> list[int]:
        return self.blocks.tolist()


def encode_text(text: str) -> MessageBlocks:
    units = np.frombuffer(text.encode("utf-16-le"), dtype="<u2")
    return MessageBlocks(units.astype(np.int64) + OFFSET)


def decode_blocks(blocks: MessageBlocks | np.ndarray | list[int]) -> str:
    arr = blocks.blocks if isinstance(blocks, MessageBlocks) else np.asarray(blocks, dtype=np.int64)
    units = arr - OFFSET
    if units.size and (units.min() < 0 or units.max() > 0xFFFF):
        raise MalformedPlaintextError("block outside the UTF-16 code-unit range")
    try:
        return units.astype("<u2").tobytes().decode("utf-16-le")
    except UnicodeDecodeError as exc:
        raise MalformedPlaintextError(f"unpaired surrogate in block stream: {exc.reason}") from exc
