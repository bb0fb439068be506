"""Problem parameters shared by every stage of the pipeline."""

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class ProblemParams:
    """Dimension ``N``, Henon exponent ``alpha``, nodal zones ``m`` and power ``p``.

    ``p`` may be omitted (``None``) for operations that only depend on
    ``(N, alpha, m)``, such as Bessel-zero matching or branch predictions.
    """

    N: int
    alpha: float
    m: int
    p: float | None = None

    def __post_init__(self):
        if not isinstance(self.N, (int,)) or isinstance(self.N, bool) or self.N < 2:
            raise InvalidArgumentError(f"N must be an integer >= 2, got {self.N!r}")
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise InvalidArgumentError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not isinstance(self.m, int) or isinstance(self.m, bool) or self.m < 1:
            raise InvalidArgumentError(f"m must be an integer >= 1, got {self.m!r}")
        if self.p is not None:
            if not math.isfinite(self.p) or not (1.0 < self.p < self.p_alpha):
                raise InvalidArgumentError(
                    f"p must lie in (1, p_alpha) = (1, {self.p_alpha}), got {self.p!r}"
                )
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.p is not None:
            object.__setattr__(self, "p", float(self.p))

    @property
    def M(self):
        """Fictitious dimension 2(N+alpha)/(2+alpha), always in [2, N]."""
        return 2.0 * (self.N + self.alpha) / (2.0 + self.alpha)

    @property
    def p_alpha(self):
        if self.N == 2:
            return math.inf
        return (self.N + 2.0 + 2.0 * self.alpha) / (self.N - 2.0)

    @property
    def bessel_base_order(self):
        """Order (N-2)/(2+alpha) of the Bessel function whose zeros fix beta_i."""
        return (self.N - 2.0) / (2.0 + self.alpha)

    @property
    def sup_limit(self):
        """-(2N-2+alpha)/(2+alpha), the separating level for nu_m versus nu_{i<m}."""
        return -(2.0 * self.N - 2.0 + self.alpha) / (2.0 + self.alpha)

    def angular_level(self, j):
        """(2/(2+alpha))^2 j(N-2+j); nu_i equal to minus this value means degeneracy in mode j."""
        return (2.0 / (2.0 + self.alpha)) ** 2 * j * (self.N - 2 + j)

    def with_power(self, p):
        return ProblemParams(self.N, self.alpha, self.m, p)

    def as_dict(self):
        return {"N": self.N, "alpha": self.alpha, "m": self.m, "p": self.p}
