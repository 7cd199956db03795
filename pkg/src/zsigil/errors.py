"""Exception hierarchy shared by all zsigil modules."""


class ZSigilError(Exception):
    """Base class for every error raised by this package."""


class GenerationError(ZSigilError):
    """A seeded sampler exhausted its resample budget."""


class InverseUndefinedError(ZSigilError, ValueError):
    """The fiber operation has no inverse for this key (a component is zero)."""


class KeyDerivationError(ZSigilError, ValueError):
    """A private key maps to a vanishing keymap value; resample it."""


class NumericFailure(ZSigilError):
    """A numerical continuation did not converge."""


class IntegrityError(ZSigilError):
    """Decryption produced values outside the rounding margin or a bad plaintext."""


class MalformedPlaintextError(IntegrityError):
    """Decoded blocks do not form a valid UTF-16 code-unit stream."""


class CapacityError(ZSigilError, ValueError):
    """The message has more blocks than the key can serve."""


class FormatError(ZSigilError, ValueError):
    """A key or ciphertext file does not parse."""
