# errors.py - PA Forge
# Exception types. Each one also derives from the built-in the caller would expect.


class PaForgeError(Exception):
    pass


class ConfigurationError(PaForgeError, ValueError):
    """Invalid plan, modulus, seed, ratio or curve configuration."""


class SecurityConditionError(ConfigurationError):
    """Final key length violates r < gamma - s."""


class SizeError(PaForgeError, ValueError):
    """Input length does not match what the operation was built for."""


class RejectedBlockError(PaForgeError, ValueError):
    """An all-ones block (x_i = 2^gamma - 1) reached the inner product."""


class InsufficientMaterialError(PaForgeError, RuntimeError):
    """Key material ran out while loading or reloading blocks."""


class SessionStateError(PaForgeError, RuntimeError):
    """Operation not allowed in the session's current state."""
