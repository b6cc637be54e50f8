"""Built-in benchmark targets with known antiderivatives."""

import numpy as np

from .errors import DomainError


def _paperfn_f(x):
    x = np.asarray(x, dtype=np.float64)
    return np.cos(x) - x**2 + 4.0 - 1.0 / (x + 1.0)


def _paperfn_F(x):
    x = np.asarray(x, dtype=np.float64)
    return np.sin(x) - x**3 / 3.0 + 4.0 * x - np.log(x + 1.0)


# id -> (integrand, antiderivative with F(0) == 0, default interval)
BUILTIN_TARGETS = {
    "paperfn": (_paperfn_f, _paperfn_F, (0.0, 5.0)),
}


def get_target(name: str):
    if name not in BUILTIN_TARGETS:
        raise DomainError(
            f"unknown builtin target '{name}' (available: {', '.join(sorted(BUILTIN_TARGETS))})"
        )
    return BUILTIN_TARGETS[name]
