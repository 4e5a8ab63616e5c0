"""Reproducible random variates, Brownian paths and deterministic-integrand Ito sums.

Every draw is tied to a :class:`StreamKey`. A key maps to its own Philox
bit generator through ``SeedSequence(seed, spawn_key=(stream_id,))``, so a
Monte Carlo sample keyed by ``(seed, sample_index)`` sees the same numbers no
matter which worker runs it or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import DomainError

__all__ = [
    "StreamKey",
    "BrownianPath",
    "generator",
    "gaussian",
    "chi",
    "chi_array",
    "beta_variate",
    "beta_array",
    "brownian_path",
    "zero_path",
    "ito_integral_deterministic",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class StreamKey:
    """Identifies one independent random stream."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & _MASK64, spawn_key=(self.stream_id & _MASK64,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, sub: int) -> "StreamKey":
        """A key for an independent sub-stream (mixed deterministically)."""
        mixed = np.random.SeedSequence(self.seed & _MASK64, spawn_key=(self.stream_id & _MASK64, sub))
        return StreamKey(int(mixed.generate_state(1, np.uint64)[0]), sub)


def generator(key) -> np.random.Generator:
    """Return a generator for ``key``; a Generator passes through unchanged.

    Passing a Generator lets one model consume a single stream across several
    calls, which is how the matrix samplers draw all their entries.
    """
    if isinstance(key, np.random.Generator):
        return key
    if isinstance(key, StreamKey):
        return key.generator()
    raise TypeError(f"expected StreamKey or Generator, got {type(key).__name__}")


def gaussian(key, count: int) -> np.ndarray:
    """``count`` i.i.d. standard normal draws."""
    if count < 0:
        raise DomainError("count must be non-negative")
    return generator(key).standard_normal(count)


def chi_array(key, r) -> np.ndarray:
    """One chi draw per entry of ``r`` (degrees of freedom, may be non-integer).

    chi_r is the square root of a Gamma(r/2, scale 2) variable.
    """
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("chi degrees of freedom must be positive")
    return np.sqrt(generator(key).gamma(r / 2.0, 2.0))


def chi(key, r: float, size=None):
    """A chi_r draw (or ``size`` of them)."""
    if not r > 0:
        raise DomainError(f"chi degrees of freedom must be positive, got {r}")
    return np.sqrt(generator(key).gamma(r / 2.0, 2.0, size=size))


def beta_array(key, c, d) -> np.ndarray:
    """Beta(c, d) draws, elementwise over broadcast ``c`` and ``d``."""
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(~(c > 0)) or np.any(~(d > 0)):
        raise DomainError("beta parameters must be positive")
    return generator(key).beta(c, d)


def beta_variate(key, c: float, d: float, size=None):
    """Draw(s) on (0, 1) with density proportional to x^(c-1) (1-x)^(d-1)."""
    if not (c > 0 and d > 0):
        raise DomainError(f"beta parameters must be positive, got ({c}, {d})")
    return generator(key).beta(c, d, size=size)


@dataclass(frozen=True)
class BrownianPath:
    """Brownian motion sampled on ``grid`` with ``values[0] == 0``."""

    grid: np.ndarray
    values: np.ndarray
    increments: np.ndarray

    @property
    def zero(self) -> bool:
        """True for the noiseless (identically zero) path."""
        return not np.any(self.increments)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise DomainError("grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    return grid


def brownian_path(key, grid) -> BrownianPath:
    """Sample B on ``grid``; B(grid[0]) = 0 and increments are N(0, dt)."""
    grid = _check_grid(grid)
    inc = generator(key).standard_normal(len(grid) - 1) * np.sqrt(np.diff(grid))
    values = np.concatenate([[0.0], np.cumsum(inc)])
    return BrownianPath(grid, values, inc)


def zero_path(grid) -> BrownianPath:
    """The identically zero path, used for the beta = infinity limit."""
    grid = _check_grid(grid)
    return BrownianPath(grid, np.zeros(len(grid)), np.zeros(len(grid) - 1))


def ito_integral_deterministic(f, path: BrownianPath) -> float:
    """Left-point sum  sum_i f(grid[i]) (B(grid[i+1]) - B(grid[i])).

    ``f`` is sampled on ``path.grid``; either all grid points or only the
    left endpoints (one fewer) may be given.
    """
    f = np.asarray(f, dtype=float)
    m = len(path.increments)
    if f.shape[-1] == m + 1:
        f = f[..., :m]
    elif f.shape[-1] != m:
        raise DomainError(f"integrand length {f.shape[-1]} does not match grid of {m + 1} points")
    return f @ path.increments
