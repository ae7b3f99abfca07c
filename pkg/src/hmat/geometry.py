"""Particle distributions and the kernels that define their interaction matrix.

The implicit dense matrix studied throughout this package has entries
``B[i, j] = K(||x_i - x_j||_2)`` for a radial kernel ``K`` over a cloud of
particles ``x_0 .. x_{n-1}`` in three dimensions.  This module generates the
particle clouds (uniform in the cube ``[-1, 1]^3``, on its surface, or on its
twelve edges) and evaluates kernel entries, rows, columns, and sub-blocks on
demand, so no caller ever has to materialise the full matrix.

Random generation uses :func:`numpy.random.default_rng` (the PCG64 bit
generator) with explicit integer seeding, so a cloud is reproducible
bit-for-bit from its ``(geometry, n, seed)`` triple.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "Geometry",
    "Kernel",
    "PointCloud",
    "KernelMatrix",
    "MatrixBlockView",
    "generate_points",
    "entry",
]


class Geometry(str, Enum):
    """Supported particle distributions inside or on the cube ``[-1, 1]^3``."""

    CUBE = "cube"
    SURF = "surf"
    EDGE = "edge"


@dataclass(frozen=True)
class Kernel:
    """Radial interaction kernel, either ``1 / r**p`` or ``ln r``.

    Both variants are defined to be ``0`` at ``r == 0``, which makes the
    diagonal of the interaction matrix zero and keeps coincident particles
    finite.  Note the logarithmic kernel is also ``0`` at ``r == 1``, but
    there by continuity rather than by convention.

    Use the :meth:`inverse_power` and :meth:`log` constructors rather than
    instantiating directly.
    """

    kind: str
    power: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("invpow", "log"):
            raise ValueError(f"unknown kernel kind: {self.kind!r}")
        if self.kind == "invpow":
            if int(self.power) != self.power or self.power < 1:
                raise ValueError("inverse-power kernel needs an integer power >= 1")
        elif self.power != 0:
            raise ValueError("the logarithmic kernel takes no power")

    @classmethod
    def inverse_power(cls, power: int) -> "Kernel":
        """Kernel ``K(r) = 1 / r**power`` (``0`` at ``r == 0``)."""
        return cls("invpow", int(power))

    @classmethod
    def log(cls) -> "Kernel":
        """Kernel ``K(r) = ln r`` (``0`` at ``r == 0``)."""
        return cls("log")

    @property
    def label(self) -> str:
        """Short spelling used by the CLI and the benchmark CSV, e.g. ``invpow:2``."""
        return f"invpow:{self.power}" if self.kind == "invpow" else "log"

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        """Inverse of :attr:`label`; accepts ``invpow:<p>`` or ``log``."""
        text = text.strip()
        if text == "log":
            return cls.log()
        if text.startswith("invpow:"):
            try:
                return cls.inverse_power(int(text.split(":", 1)[1]))
            except ValueError as exc:
                raise ValueError(f"bad kernel spec: {text!r}") from exc
        raise ValueError(f"bad kernel spec: {text!r} (expected 'invpow:<p>' or 'log')")

    def __call__(self, r: np.ndarray | float) -> np.ndarray | float:
        """Evaluate the kernel elementwise on distances ``r >= 0``."""
        arr = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            if self.kind == "invpow":
                vals = np.where(arr > 0.0, arr ** float(-self.power), 0.0)
            else:
                vals = np.where(arr > 0.0, np.log(np.where(arr > 0.0, arr, 1.0)), 0.0)
        if np.isscalar(r):
            return float(vals)
        return vals


@dataclass(frozen=True)
class PointCloud:
    """An immutable set of particles together with its generation record.

    Attributes
    ----------
    points : (n, 3) float64 ndarray
        Particle coordinates.  The array is stored read-only.
    geometry : Geometry
        Distribution the cloud was drawn from.
    seed : int
        Seed passed to the generator; with ``geometry`` and ``n`` this
        reproduces the cloud exactly.
    """

    points: np.ndarray
    geometry: Geometry
    seed: int

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (n, 3)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]


def generate_points(geometry: Geometry | str, n: int, seed: int) -> PointCloud:
    """Draw ``n`` particles from one of the cube distributions.

    Parameters
    ----------
    geometry : Geometry or str
        ``cube`` fills the solid cube ``[-1, 1]^3`` uniformly.  ``surf``
        picks one of the six faces uniformly and a uniform point on it, so
        every point has at least one coordinate of magnitude exactly 1.
        ``edge`` picks one of the twelve edges uniformly and a uniform point
        along it, so every point has at least two coordinates of magnitude
        exactly 1.
    n : int
        Number of particles, at least 1.
    seed : int
        Seed for :func:`numpy.random.default_rng`.  The same
        ``(geometry, n, seed)`` triple always returns the identical cloud.

    Returns
    -------
    PointCloud
    """
    geometry = Geometry(geometry)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    pts = np.empty((n, 3), dtype=np.float64)
    if geometry is Geometry.CUBE:
        pts[:] = rng.uniform(-1.0, 1.0, size=(n, 3))
    elif geometry is Geometry.SURF:
        face = rng.integers(0, 6, size=n)
        uv = rng.uniform(-1.0, 1.0, size=(n, 2))
        axis = face // 2
        sign = (1 - 2 * (face % 2)).astype(np.float64)
        other = ((1, 2), (0, 2), (0, 1))
        for a in range(3):
            m = axis == a
            pts[m, a] = sign[m]
            pts[m, other[a][0]] = uv[m, 0]
            pts[m, other[a][1]] = uv[m, 1]
    else:
        edge = rng.integers(0, 12, size=n)
        t = rng.uniform(-1.0, 1.0, size=n)
        axis = edge // 4
        s1 = (1 - 2 * ((edge // 2) % 2)).astype(np.float64)
        s2 = (1 - 2 * (edge % 2)).astype(np.float64)
        other = ((1, 2), (0, 2), (0, 1))
        for a in range(3):
            m = axis == a
            pts[m, a] = t[m]
            pts[m, other[a][0]] = s1[m]
            pts[m, other[a][1]] = s2[m]
    return PointCloud(points=pts, geometry=geometry, seed=int(seed))


def entry(cloud: PointCloud, kernel: Kernel, i: int, j: int) -> float:
    """Single interaction entry ``K(||x_i - x_j||)``; ``0`` on the diagonal."""
    n = cloud.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"entry index ({i}, {j}) out of range for n={n}")
    d = cloud.points[i] - cloud.points[j]
    return float(kernel(float(np.sqrt(d @ d))))


class KernelMatrix:
    """Entry oracle for the implicit dense interaction matrix of a cloud.

    Evaluates single entries, rows, columns, and general sub-blocks without
    ever storing the full matrix.  All paths go through the same
    distance-matrix routine so dense blocks assembled from this oracle match
    sweeps over it bit for bit.
    """

    def __init__(self, cloud: PointCloud, kernel: Kernel) -> None:
        self.cloud = cloud
        self.kernel = kernel
        self._pts = cloud.points

    @property
    def n(self) -> int:
        return self._pts.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def entry(self, i: int, j: int) -> float:
        return entry(self.cloud, self.kernel, i, j)

    def block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Dense sub-block ``B[rows, cols]`` as a ``(len(rows), len(cols))`` array."""
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        d = cdist(self._pts[rows], self._pts[cols])
        return self.kernel(d)

    def col(self, j: int) -> np.ndarray:
        """Full column ``B[:, j]``."""
        if not 0 <= j < self.n:
            raise IndexError(f"column {j} out of range for n={self.n}")
        return self.block(np.arange(self.n), np.asarray([j])).ravel()

    def row(self, i: int) -> np.ndarray:
        """Full row ``B[i, :]``."""
        if not 0 <= i < self.n:
            raise IndexError(f"row {i} out of range for n={self.n}")
        return self.block(np.asarray([i]), np.arange(self.n)).ravel()

    def dense(self) -> np.ndarray:
        """The whole matrix; intended for small n (tests and oracles)."""
        idx = np.arange(self.n)
        return self.block(idx, idx)


class MatrixBlockView:
    """A sub-block of a :class:`KernelMatrix`, addressed by index subsets.

    Presents the ``shape`` / ``row`` / ``col`` / ``dense`` surface the
    low-rank approximation routines expect, while only ever evaluating the
    rows and columns actually requested.
    """

    def __init__(self, matrix: KernelMatrix, row_index: np.ndarray, col_index: np.ndarray) -> None:
        self._matrix = matrix
        self._rows = np.asarray(row_index, dtype=np.intp)
        self._cols = np.asarray(col_index, dtype=np.intp)

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows.size, self._cols.size)

    def row(self, i: int) -> np.ndarray:
        return self._matrix.block(self._rows[i : i + 1], self._cols).ravel()

    def col(self, j: int) -> np.ndarray:
        return self._matrix.block(self._rows, self._cols[j : j + 1]).ravel()

    def dense(self) -> np.ndarray:
        return self._matrix.block(self._rows, self._cols)
