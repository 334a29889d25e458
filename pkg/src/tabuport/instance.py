"""Asset universes and the OR-Library ``portN`` file format.

A ``portN`` file is a stream of whitespace-separated tokens::

    n
    mean_1 std_1
    ...
    mean_n std_n
    i j rho_ij        (1-based, every pair i <= j including the diagonal)

Line breaks carry no meaning; only the token order does.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .exceptions import (
    CorrelationOutOfRange,
    InconsistentCount,
    IndexOutOfRange,
    MalformedFile,
)

CORRELATION_TOL = 1e-9

# Benchmark files in the order they are usually numbered on OR-Library.
BENCHMARKS = {
    "hangseng": ("port1.txt", 31),
    "dax": ("port2.txt", 85),
    "ftse": ("port3.txt", 89),
    "sp": ("port4.txt", 98),
    "nikkei": ("port5.txt", 225),
}


class AssetStats(NamedTuple):
    index: int
    mean_return: float
    std_dev: float


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable asset universe: mean returns, std devs and covariance.

    Arrays are made read-only on construction so an instance can be shared
    between worker processes and threads without copying.
    """

    mean: np.ndarray
    std: np.ndarray
    correlation: np.ndarray
    covariance: np.ndarray
    name: str = ""

    def __post_init__(self):
        for arr in (self.mean, self.std, self.correlation, self.covariance):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    @property
    def stats(self) -> list[AssetStats]:
        return [
            AssetStats(i, float(m), float(s))
            for i, (m, s) in enumerate(zip(self.mean, self.std))
        ]

    @classmethod
    def from_correlation(cls, mean, std, correlation, name: str = "") -> "Instance":
        mean = np.array(mean, dtype=float)
        std = np.array(std, dtype=float)
        correlation = np.array(correlation, dtype=float)
        n = mean.shape[0]
        if n < 2:
            raise InconsistentCount(f"need at least 2 assets, got {n}")
        if std.shape != (n,) or correlation.shape != (n, n):
            raise InconsistentCount(
                f"shape mismatch: mean {mean.shape}, std {std.shape}, "
                f"correlation {correlation.shape}"
            )
        if np.any(std < 0):
            raise MalformedFile("standard deviations must be non-negative")
        covariance = correlation * np.outer(std, std)
        np.fill_diagonal(covariance, std * std)
        return cls(mean, std, correlation, covariance, name)

    @classmethod
    def from_covariance(cls, mean, covariance, name: str = "") -> "Instance":
        """Build an instance from a mean vector and a covariance matrix.

        The matrix is symmetrised as ``(C + C.T) / 2`` so the stored
        covariance is exactly symmetric.
        """
        covariance = np.array(covariance, dtype=float)
        covariance = 0.5 * (covariance + covariance.T)
        std = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
        denom = np.outer(std, std)
        with np.errstate(divide="ignore", invalid="ignore"):
            correlation = np.where(denom > 0, covariance / denom, 0.0)
        np.fill_diagonal(correlation, 1.0)
        inst = cls.from_correlation(mean, std, correlation, name)
        # keep the caller's matrix rather than the rho * s * s reconstruction
        cov = covariance.copy()
        np.fill_diagonal(cov, std * std)
        return cls(inst.mean, inst.std, inst.correlation, cov, name)


def covariance_of(instance: Instance, i: int, j: int) -> float:
    n = instance.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"asset pair ({i}, {j}) outside 0..{n - 1}")
    return float(instance.covariance[i, j])


class _Token(NamedTuple):
    text: str
    line: int
    col: int


def _tokens(text: str) -> Iterator[_Token]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        for m in re.finditer(r"\S+", line):
            yield _Token(m.group(), lineno, m.start() + 1)


def _where(tok: _Token) -> str:
    return f"line {tok.line}, column {tok.col}"


def _to_float(tok: _Token) -> float:
    try:
        value = float(tok.text.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise MalformedFile(f"non-numeric token {tok.text!r} at {_where(tok)}") from None
    if not math.isfinite(value):
        raise MalformedFile(f"non-finite value {tok.text!r} at {_where(tok)}")
    return value


def _to_int(tok: _Token) -> int:
    value = _to_float(tok)
    if value != int(value):
        raise MalformedFile(f"expected an integer, got {tok.text!r} at {_where(tok)}")
    return int(value)


def _expected_tokens(n: int) -> int:
    return 2 * n + 3 * (n * (n + 1) // 2)


def _implied_count(remaining: int) -> int | None:
    # asset count that would explain `remaining` tokens after the header
    m = 1
    while _expected_tokens(m) <= remaining:
        if _expected_tokens(m) == remaining:
            return m
        m += 1
    return None


def parse_orlib(text: str, name: str = "") -> Instance:
    """Parse the contents of an OR-Library portfolio file."""
    toks = list(_tokens(text))
    if not toks:
        raise MalformedFile("empty file")
    n = _to_int(toks[0])
    if n < 2:
        raise InconsistentCount(f"declared asset count {n} at {_where(toks[0])}; need >= 2")
    body = toks[1:]
    for tok in body:
        _to_float(tok)  # report the first bad token before counting problems

    if len(body) != _expected_tokens(n):
        implied = _implied_count(len(body))
        msg = (
            f"declared {n} assets needs {_expected_tokens(n)} tokens after the header, "
            f"found {len(body)}"
        )
        if implied is not None:
            raise InconsistentCount(f"{msg} (entries describe {implied} assets)")
        if len(body) < 2 * n:
            raise InconsistentCount(f"{msg} (fewer than {n} mean/std pairs)")
        raise MalformedFile(msg)

    mean = np.array([_to_float(t) for t in body[0 : 2 * n : 2]])
    std = np.array([_to_float(t) for t in body[1 : 2 * n : 2]])
    if np.any(std < 0):
        bad = int(np.argmax(std < 0))
        raise MalformedFile(f"negative standard deviation for asset {bad + 1}")

    corr = np.full((n, n), np.nan)
    triples = body[2 * n :]
    for a in range(0, len(triples), 3):
        ti, tj, tr = triples[a : a + 3]
        i, j, rho = _to_int(ti), _to_int(tj), _to_float(tr)
        if not (1 <= i <= n and 1 <= j <= n):
            raise MalformedFile(f"asset index out of 1..{n} at {_where(ti)}")
        if abs(rho) > 1 + CORRELATION_TOL:
            raise CorrelationOutOfRange(f"|rho| = {abs(rho)} > 1 at {_where(tr)}")
        if i == j and abs(rho - 1.0) > CORRELATION_TOL:
            raise CorrelationOutOfRange(
                f"diagonal correlation for asset {i} is {rho}, expected 1 at {_where(tr)}"
            )
        if not math.isnan(corr[i - 1, j - 1]):
            raise MalformedFile(f"duplicate correlation entry ({i}, {j}) at {_where(ti)}")
        corr[i - 1, j - 1] = rho
        corr[j - 1, i - 1] = rho

    missing = np.argwhere(np.isnan(corr))
    if missing.size:
        i, j = missing[0] + 1
        raise InconsistentCount(f"missing correlation entry ({i}, {j})")
    return Instance.from_correlation(mean, std, corr, name)


def format_orlib(instance: Instance) -> str:
    """Serialise an instance back to the OR-Library layout (round-trips exactly)."""
    n = instance.n
    lines = [f" {n}"]
    lines += [f" {m!r} {s!r}" for m, s in zip(instance.mean.tolist(), instance.std.tolist())]
    corr = instance.correlation
    for i in range(n):
        for j in range(i, n):
            lines.append(f" {i + 1} {j + 1} {float(corr[i, j])!r}")
    return "\n".join(lines) + "\n"


def load_orlib(path: str | os.PathLike) -> Instance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read instance file {path}: {exc.strerror}") from exc
    try:
        return parse_orlib(text, name=path.stem)
    except (MalformedFile, InconsistentCount, CorrelationOutOfRange) as exc:
        raise type(exc)(f"{path}: {exc}") from None


def benchmark_dir() -> Path:
    """Directory holding ``port1.txt`` .. ``port5.txt``.

    Taken from ``$ORLIB_DIR`` if set, otherwise ``data/orlib`` at the
    repository root.
    """
    env = os.environ.get("ORLIB_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data" / "orlib"


def benchmark_path(key: str) -> Path:
    filename, _ = BENCHMARKS[key]
    return benchmark_dir() / filename


def load_benchmark(key: str) -> Instance:
    inst = load_orlib(benchmark_path(key))
    return Instance(inst.mean, inst.std, inst.correlation, inst.covariance, key)


def random_instance(
    n: int,
    rng: np.random.Generator,
    n_factors: int = 3,
    mean_scale: float = 0.005,
    vol_scale: float = 0.04,
    name: str = "",
) -> Instance:
    """Synthetic weekly-return-like instance from a small factor model.

    Covariance is ``B B^T + D`` so it is positive definite.
    """
    loadings = rng.normal(0.0, vol_scale / math.sqrt(n_factors + 1), size=(n, n_factors))
    idio = rng.uniform(0.3, 1.0, size=n) * (vol_scale / 2) ** 2
    cov = loadings @ loadings.T + np.diag(idio)
    std = np.sqrt(np.diag(cov))
    # reward risk loosely so the frontier is not degenerate
    mean = mean_scale * (0.2 + 1.2 * std / std.max()) + rng.normal(0, mean_scale / 4, size=n)
    return Instance.from_covariance(mean, cov, name=name)

