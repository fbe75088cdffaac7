"""Exception types shared across the package."""

from __future__ import annotations

import numpy as np


class DimensionMismatch(ValueError):
    pass


class UnboundedSupport(ValueError):
    """Support function is +inf at the requested direction (cone targets)."""


class UnboundedSet(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


class IndexOutOfRange(IndexError):
    pass


class Infeasible(RuntimeError):
    pass


class Unbounded(RuntimeError):
    pass


class IterationLimit(RuntimeError):
    pass


class SeparationViolation(RuntimeError):
    """No mixed action keeps <w, r(x, j)> below h_S(w) for every column j.

    Carries the certificate ``(w, value, support)``: the scalarized game value
    exceeds the support value, so the target set is not approachable.
    """

    def __init__(self, w, value: float, support: float):
        self.w = np.asarray(w, dtype=float).copy()
        self.value = float(value)
        self.support = float(support)
        super().__init__(
            f"separation violated at w={self.w.tolist()}: "
            f"val(w.r)={self.value:.12g} > h_S(w)={self.support:.12g}"
        )


class MissingSamples(ValueError):
    pass


class ConfigError(ValueError):
    """Base for configuration problems; ``path`` is the offending key path.

    ``errors`` lists every (path, message) found when more than one was collected.
    """

    def __init__(self, message: str, path: str = "", errors: list[tuple[str, str]] | None = None):
        self.path = path
        self.errors = errors if errors is not None else [(path, message)]
        super().__init__(f"{path}: {message}" if path else message)


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
