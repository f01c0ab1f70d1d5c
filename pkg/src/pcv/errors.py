"""Exception types shared across the package."""


class PcvError(Exception):
    """Base class for all package errors."""


class NumericalBlowup(PcvError):
    """Lattice coordinates left the physical range; integration is corrupted."""


class DimMismatch(PcvError):
    """Array or mask dimensions do not match the lattice."""


class DoesNotFit(PcvError):
    """Glyph layout does not fit on the lattice at the chosen scale."""


class EntropyUnavailable(PcvError):
    """The OS secure random source could not be read."""


class LengthMismatch(PcvError):
    """Split-state section has the wrong byte length."""


class EmptyPassword(PcvError):
    """A short password must be non-empty."""


class AuthFailure(PcvError):
    """Authenticated decryption failed: wrong key material or tampering."""


class MalformedContainer(PcvError):
    """Container bytes do not parse as a valid vault file."""


class SelfCheckExhausted(PcvError):
    """Encryption-time legibility self-check failed after all retries."""


class SessionExpired(PcvError):
    """Decrypt session TTL elapsed or session already consumed."""


class DegenerateSeparation(PcvError):
    """Trajectory separation underflowed to zero during Lyapunov estimation."""
