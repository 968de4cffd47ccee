"""Problem representation, standardization, synthetic data and CSV I/O."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    MissingResponseColumnError,
    NonFiniteInputError,
    ParseError,
    ZeroColumnError,
)

UNIT_NORM_TOL = 1e-12


def _frozen(a, dtype=float):
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RawDataset:
    X: np.ndarray
    y: np.ndarray
    column_names: tuple = ()

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ConfigError(f"need n >= 1 and p >= 1, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise ConfigError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise NonFiniteInputError("dataset contains NaN or infinite entries")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        names = tuple(self.column_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        object.__setattr__(self, "column_names", names)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class StandardizedProblem:
    """Design with unit-norm columns plus response; shared by every engine.

    Build it with :func:`standardize`. Direct construction validates the
    unit-norm (and, if ``centered``, zero-mean) invariants.
    """

    X: np.ndarray
    y: np.ndarray
    centered: bool = False
    column_scales: np.ndarray = None
    y_mean: float = 0.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise ConfigError("X and y disagree on n")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise NonFiniteInputError("problem contains NaN or infinite entries")
        norms = np.linalg.norm(X, axis=0)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
        if bad.size:
            raise ConfigError(f"column {bad[0]} has norm {norms[bad[0]]!r}, expected 1")
        if self.centered:
            if np.max(np.abs(X.mean(axis=0))) > UNIT_NORM_TOL or abs(y.mean()) > UNIT_NORM_TOL:
                raise ConfigError("centered problem has nonzero column or response mean")
        scales = np.ones(X.shape[1]) if self.column_scales is None else self.column_scales
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "column_scales", _frozen(scales))
        object.__setattr__(self, "y_mean", float(self.y_mean))
        object.__setattr__(self, "centered", bool(self.centered))

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def loss(self, beta):
        """Least squares loss ||y - X beta||^2 / (2n)."""
        r = self.y - self.X @ beta
        return float(r @ r) / (2 * self.n)

    @property
    def null_loss(self):
        return float(self.y @ self.y) / (2 * self.n)

    def to_raw_units(self, beta):
        """Map standardized coefficients back to the original column units."""
        return np.asarray(beta) / self.column_scales


def standardize(raw, center=True):
    """Scale columns to unit l2 norm, optionally centering X and y first.

    Raises ZeroColumnError if a column vanishes (e.g. a constant column
    under centering).
    """
    if not isinstance(raw, RawDataset):
        raw = RawDataset(*raw)
    X = np.array(raw.X, dtype=float)
    y = np.array(raw.y, dtype=float)
    y_mean = 0.0
    if center:
        X = X - X.mean(axis=0)
        y_mean = float(y.mean())
        y = y - y_mean
    scales = np.linalg.norm(X, axis=0)
    # a column that is zero up to rounding after centering counts as zero
    tiny = np.sqrt(X.shape[0]) * np.finfo(float).eps * np.max(np.abs(raw.X), axis=0)
    bad = np.flatnonzero(scales <= np.maximum(tiny, 0.0))
    if bad.size:
        raise ZeroColumnError(int(bad[0]))
    X = X / scales
    # second pass removes the last ulp of drift so the 1e-12 invariant is robust
    X = X / np.linalg.norm(X, axis=0)
    if center:
        X = X - X.mean(axis=0)
        X = X / np.linalg.norm(X, axis=0)
    return StandardizedProblem(X, y, centered=center, column_scales=scales, y_mean=y_mean)


@dataclass(frozen=True)
class SyntheticSpec:
    """Equicorrelated Gaussian design with ``beta_pop_support`` leading ones."""

    n: int
    p: int
    rho: float = 0.0
    snr: float = 1.0
    beta_pop_support: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ConfigError("n and p must be positive")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError(f"rho must lie in [0, 1), got {self.rho}")
        if not self.snr > 0:
            raise ConfigError(f"snr must be positive, got {self.snr}")
        if not 0 <= self.beta_pop_support <= self.p:
            raise ConfigError("beta_pop_support must lie in [0, p]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @classmethod
    def eg_a(cls, n=50, p=500, rho=0.5, snr=1.0, seed=0):
        return cls(n, p, rho, snr, 5, seed)

    @classmethod
    def eg_b(cls, n=50, p=500, rho=0.0, snr=1.0, seed=0):
        return cls(n, p, rho, snr, 10, seed)


@dataclass(frozen=True)
class SyntheticDraw:
    data: RawDataset
    beta_pop: np.ndarray
    noise_var: float
    spec: SyntheticSpec = field(repr=False, default=None)


def population_signal_variance(rho, support):
    """Var(x'beta_pop) for the equicorrelated design with unit leading coefficients."""
    s = support
    return rho * s * s + (1.0 - rho) * s


def make_rng(seed):
    """PCG64 generator; the stream for a given seed is stable across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


def generate_synthetic(spec):
    """Draw (X, y) with rows x = sqrt(rho) z 1 + sqrt(1 - rho) w, y = X beta_pop + noise."""
    rng = make_rng(spec.seed)
    z = rng.standard_normal((spec.n, 1))
    w = rng.standard_normal((spec.n, spec.p))
    X = math.sqrt(spec.rho) * z + math.sqrt(1.0 - spec.rho) * w
    beta = np.zeros(spec.p)
    beta[: spec.beta_pop_support] = 1.0
    signal = population_signal_variance(spec.rho, spec.beta_pop_support)
    noise_var = signal / spec.snr
    y = X @ beta + math.sqrt(noise_var) * rng.standard_normal(spec.n)
    return SyntheticDraw(RawDataset(X, y), _frozen(beta), float(noise_var), spec)


# ---------------------------------------------------------------- CSV I/O


def format_value(v):
    """Shortest round-trip text for floats; plain text for everything else."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def read_table(path):
    """Read a numeric CSV with a header row. Returns (header, matrix)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", row=1) from None
        if not header or any(h == "" for h in header):
            raise ParseError("header has empty field names", row=1)
        rows = []
        for line_no, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, found {len(fields)}", row=line_no
                )
            values = []
            for name, cell in zip(header, fields):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"not a number: {cell!r}", row=line_no, column=name) from None
                if not math.isfinite(v):
                    raise ParseError(f"non-finite value {cell!r}", row=line_no, column=name)
                values.append(v)
            rows.append(values)
    if not rows:
        raise ParseError("no data rows", row=2)
    return header, np.array(rows, dtype=float)


def load_csv(path, response_column):
    """Load a design/response pair from one CSV file.

    ``response_column`` is a header name or a zero-based index.
    """
    header, M = read_table(path)
    if isinstance(response_column, (int, np.integer)):
        if not 0 <= response_column < len(header):
            raise MissingResponseColumnError(f"response index {response_column} out of range")
        idx = int(response_column)
    else:
        if response_column not in header:
            raise MissingResponseColumnError(
                f"response column {response_column!r} not in header {header}"
            )
        idx = header.index(response_column)
    keep = [j for j in range(len(header)) if j != idx]
    if not keep:
        raise ParseError("no covariate columns besides the response", row=1)
    return RawDataset(M[:, keep], M[:, idx], tuple(header[j] for j in keep))


def save_dataset(raw, directory):
    """Write X.csv and y.csv into ``directory``."""
    directory = Path(directory)
    write_csv(directory / "X.csv", list(raw.column_names), raw.X.tolist())
    write_csv(directory / "y.csv", ["y"], [[v] for v in raw.y.tolist()])


def load_dataset(directory):
    """Inverse of :func:`save_dataset`."""
    directory = Path(directory)
    names, X = read_table(directory / "X.csv")
    _, Y = read_table(directory / "y.csv")
    if Y.shape[0] != X.shape[0]:
        raise ParseError("X.csv and y.csv have different row counts")
    return RawDataset(X, Y[:, 0], tuple(names))
