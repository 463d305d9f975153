"""Parameters, the Dirichlet grid, node-value fields and their discrete norms.

Fields store interior nodes only. Boundary values are identically zero and
never stored, so homogeneous Dirichlet conditions cannot be violated.
Array axis 0 runs along x, axis 1 along y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GridMismatchError(ValueError):
    """Two fields living on different grids were combined."""


@dataclass(frozen=True)
class ChevronParams:
    """Physical coefficients of the chevron system.

    ``tau`` is the amplitude time scale, ``D1``/``D2`` the anisotropic
    director diffusion, ``c1``/``c2`` the torque couplings, ``h`` the
    magnetic dampening and ``beta`` the phase/gradient coupling.
    """

    tau: float = 1.0
    D1: float = 1.0
    D2: float = 1.0
    c1: float = 0.0
    c2: float = 0.0
    h: float = 0.5
    beta: float = 0.0

    def __post_init__(self):
        for name in ("tau", "D1", "D2", "c1", "c2", "h", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        for name in ("tau", "D1", "D2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("c1", "c2", "h"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)!r}")

    def dissipative_regime(self) -> bool:
        """True when the energy estimates close: c1 < 1, or c1 >= 2 c2 > 0."""
        return self.c1 < 1.0 or (self.c2 > 0.0 and self.c1 >= 2.0 * self.c2)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("tau", "D1", "D2", "c1", "c2", "h", "beta")}


@dataclass(frozen=True)
class Grid2D:
    """Uniform interior grid on the rectangle [0, Lx] x [0, Ly]."""

    nx: int
    ny: int
    Lx: float = 1.0
    Ly: float = 1.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise ValueError("nx and ny must be integers")
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"need at least 3 interior nodes per axis, got {self.nx}x{self.ny}")
        if not (self.Lx > 0 and self.Ly > 0 and math.isfinite(self.Lx) and math.isfinite(self.Ly)):
            raise ValueError("side lengths must be positive and finite")

    @property
    def dx(self) -> float:
        return self.Lx / (self.nx + 1)

    @property
    def dy(self) -> float:
        return self.Ly / (self.ny + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def area(self) -> float:
        return self.Lx * self.Ly

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(1, self.nx + 1)

    @property
    def y(self) -> np.ndarray:
        return self.dy * np.arange(1, self.ny + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates ``(X, Y)`` with ``X[i, j] = x_i``, ``Y[i, j] = y_j``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def zeros(self, dtype=float) -> np.ndarray:
        return np.zeros(self.shape, dtype=dtype)


@dataclass(frozen=True, eq=False)
class Field:
    """Node values of a real or complex scalar field on a :class:`Grid2D`.

    The value array is copied and frozen on construction.
    """

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, copy=True)
        if vals.dtype.kind not in "fc":
            vals = vals.astype(float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            bad = np.argwhere(~np.isfinite(vals))[0]
            raise ValueError(f"non-finite field value at node {tuple(int(b) for b in bad)}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: Grid2D, complex: bool = False) -> "Field":
        return cls(grid, grid.zeros(np.complex128 if complex else float))

    @classmethod
    def from_function(cls, grid: Grid2D, func) -> "Field":
        X, Y = grid.mesh()
        return cls(grid, func(X, Y))

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def _check(self, other: "Field") -> None:
        if not isinstance(other, Field):
            raise TypeError(f"expected Field, got {type(other).__name__}")
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        self._check(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values * other.values)
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.values))

    def abs(self) -> "Field":
        return Field(self.grid, np.abs(self.values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def RealField(grid: Grid2D, values) -> Field:
    vals = np.asarray(values)
    if vals.dtype.kind == "c":
        raise TypeError("RealField requires real values")
    return Field(grid, vals.astype(float))


def ComplexField(grid: Grid2D, values) -> Field:
    return Field(grid, np.asarray(values, dtype=np.complex128))


@dataclass(frozen=True)
class SimState:
    """Snapshot ``(A, phi, t)`` of the PDE system."""

    A: Field
    phi: Field
    t: float = 0.0

    def __post_init__(self):
        if self.A.grid != self.phi.grid:
            raise GridMismatchError("A and phi must share a grid")
        if self.phi.is_complex:
            raise TypeError("phi must be real")
        if not self.A.is_complex:
            object.__setattr__(self, "A", ComplexField(self.A.grid, self.A.values))
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise ValueError(f"time must be finite and non-negative, got {self.t!r}")

    @property
    def grid(self) -> Grid2D:
        return self.A.grid

    @classmethod
    def zeros(cls, grid: Grid2D, t: float = 0.0) -> "SimState":
        return cls(Field.zeros(grid, complex=True), Field.zeros(grid), t)

    @classmethod
    def from_arrays(cls, grid: Grid2D, A: np.ndarray, phi: np.ndarray, t: float = 0.0) -> "SimState":
        return cls(ComplexField(grid, A), RealField(grid, phi), t)


def l2_norm_sq(f: Field) -> float:
    """Discrete ``||f||^2 = dx dy sum |f_ij|^2``."""
    v = f.values
    if f.is_complex:
        s = np.sum(v.real**2 + v.imag**2)
    else:
        s = np.sum(v * v)
    return float(f.grid.cell_area * s)


def l4_norm_4(f: Field) -> float:
    """Discrete ``||f||_{L^4}^4 = dx dy sum |f_ij|^4``."""
    m2 = np.abs(f.values) ** 2
    return float(f.grid.cell_area * np.sum(m2 * m2))


def inner_product(f: Field, g: Field):
    """Discrete ``(f, g) = dx dy sum f_ij conj(g_ij)``; real when both fields are real."""
    f._check(g)
    s = np.sum(f.values * np.conj(g.values))
    if not (f.is_complex or g.is_complex):
        return float(f.grid.cell_area * s)
    return complex(f.grid.cell_area * s)
