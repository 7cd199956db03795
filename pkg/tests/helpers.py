import numpy as np


def random_text(rng, n_units: int, astral_fraction: float = 0.1) -> str:
    """Random string of exactly ``n_units`` UTF-16 code units, no lone surrogates."""
    chars = []
    units = 0
    while units < n_units:
        if units + 2 <= n_units and rng.random() < astral_fraction:
            chars.append(int(rng.integers(0x10000, 0x110000)))
            units += 2
        else:
            cp = int(rng.integers(0, 0xF800))
            chars.append(cp if cp < 0xD800 else cp + 0x800)
            units += 1
    return "".join(map(chr, chars))


def fast_random_text(rng, n_units: int) -> str:
    """Vectorized variant for long messages: BMP code points plus surrogate pairs."""
    n_pairs = int(rng.integers(0, n_units // 2 + 1)) if n_units > 1 else 0
    n_pairs = min(n_pairs, n_units // 10)
    bmp = rng.integers(0, 0xF800, size=n_units - 2 * n_pairs)
    bmp = np.where(bmp < 0xD800, bmp, bmp + 0x800)
    astral = rng.integers(0x10000, 0x110000, size=n_pairs)
    cps = np.concatenate([bmp, astral])
    rng.shuffle(cps)
    return cps.astype("<u4").tobytes().decode("utf-32-le")
