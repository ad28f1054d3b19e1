"""Reproducible Brownian-motion ensembles on small explicit time grids.

Every Gaussian increment is a pure function of ``(master_seed, label, path,
step)``.  The stream for ``(master_seed, label)`` is a Philox4x64 counter
generator; the increment of stream-path ``i`` on grid interval ``k`` is raw word
``j = i * K + k`` (``K`` grid intervals), which lives in counter block
``j // 4``.  Any slice of paths can therefore be produced in isolation, in any
order, on any number of workers, with bit-identical results.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import ConfigError

_WORDS_PER_BLOCK = 4
_U52 = 2.0**-52


class Label(enum.Enum):
    W = "W"
    B = "B"
    XI = "XI"

    @property
    def code(self) -> int:
        return {"W": 0, "B": 1, "XI": 2}[self.value]


@dataclass(frozen=True)
class SimConfig:
    master_seed: int
    n_paths: int
    time_grid: tuple[float, ...]
    antithetic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "time_grid", tuple(float(t) for t in self.time_grid))
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if self.n_paths <= 0:
            raise ConfigError("n_paths must be positive")
        if not self.time_grid:
            raise ConfigError("time grid is empty")
        grid = np.array(self.time_grid)
        if not np.all(np.isfinite(grid)) or grid[0] <= 0 or np.any(np.diff(grid) <= 0):
            raise ConfigError("time grid must be strictly increasing with a positive first element")
        if self.antithetic and self.n_paths < 2:
            raise ConfigError("antithetic sampling needs at least two paths")

    @property
    def n_streams(self) -> int:
        """Number of independent stream paths (half the paths when antithetic)."""
        return (self.n_paths + 1) // 2 if self.antithetic else self.n_paths

    def to_dict(self) -> dict:
        return {
            "master_seed": int(self.master_seed),
            "n_paths": int(self.n_paths),
            "time_grid": list(self.time_grid),
            "antithetic": bool(self.antithetic),
        }


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    config: SimConfig
    values: np.ndarray
    label: Label

    @property
    def times(self) -> tuple[float, ...]:
        return self.config.time_grid

    def column(self, t: float) -> np.ndarray:
        return self.values[:, self.config.time_grid.index(float(t))]


def stream_key(master_seed: int, label: Label) -> np.ndarray:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(label.code,))
    return ss.generate_state(2, np.uint64)


def _raw_words(key: np.ndarray, start: int, count: int) -> np.ndarray:
    block, skip = divmod(start, _WORDS_PER_BLOCK)
    gen = np.random.Philox(key=key, counter=np.array([block, 0, 0, 0], dtype=np.uint64))
    return gen.random_raw(skip + count)[skip:]


def uniform_from_words(words: np.ndarray) -> np.ndarray:
    """Map 64-bit words to the open interval (0, 1) using their top 52 bits.

    ``k + 0.5`` is exact for k < 2**52, so the result never rounds to 1.
    """
    return ((words >> np.uint64(12)).astype(np.float64) + 0.5) * _U52


def _normals(key: np.ndarray, start: int, count: int) -> np.ndarray:
    return ndtri(uniform_from_words(_raw_words(key, start, count)))


def _increment_sd(config: SimConfig) -> np.ndarray:
    return np.sqrt(np.diff(np.concatenate(([0.0], config.time_grid))))


def _stream_block(config: SimConfig, key: np.ndarray, first: int, stop: int) -> np.ndarray:
    k = len(config.time_grid)
    z = _normals(key, first * k, (stop - first) * k).reshape(stop - first, k)
    return np.cumsum(z * _increment_sd(config), axis=1)


def generate(config: SimConfig, label: Label = Label.W, chunk_size: int | None = None,
             workers: int = 1) -> PathEnsemble:
    """Sample ``config.n_paths`` Brownian paths at ``config.time_grid``.

    Work may be split into ``chunk_size``-path slices evaluated on ``workers``
    threads; the result does not depend on either setting.
    """
    label = Label(label)
    key = stream_key(config.master_seed, label)
    n = config.n_streams
    step = n if not chunk_size else max(1, int(chunk_size))
    bounds = [(a, min(a + step, n)) for a in range(0, n, step)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda b: _stream_block(config, key, *b), bounds))
    else:
        blocks = [_stream_block(config, key, a, b) for a, b in bounds]
    w = np.concatenate(blocks, axis=0)
    if config.antithetic:
        w = np.repeat(w, 2, axis=0)[: config.n_paths]
        w[1::2] *= -1.0
    w.setflags(write=False)
    return PathEnsemble(config=config, values=w, label=label)


def path(config: SimConfig, label: Label, index: int) -> np.ndarray:
    """Regenerate path ``index`` alone, without touching any other path."""
    if not 0 <= index < config.n_paths:
        raise IndexError(index)
    key = stream_key(config.master_seed, Label(label))
    stream = index // 2 if config.antithetic else index
    w = _stream_block(config, key, stream, stream + 1)[0]
    return -w if config.antithetic and index % 2 else w


def generate_pair(config: SimConfig, **kwargs) -> tuple[PathEnsemble, PathEnsemble]:
    """Independent ensembles ``(W, B)`` drawn from disjoint stream families."""
    return generate(config, Label.W, **kwargs), generate(config, Label.B, **kwargs)


def standard_normal_samples(seed: int, n: int) -> np.ndarray:
    if n < 1:
        raise ConfigError("need at least one sample")
    if not 0 <= int(seed) < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    out = _normals(stream_key(seed, Label.XI), 0, int(n))
    out.setflags(write=False)
    return out
