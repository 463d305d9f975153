"""Deterministic initial data."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from chevron.core import Grid2D, SimState
from chevron.fdops import sine_mode
from chevron.io import read_snapshot

PRNG_NAME = "numpy.random.default_rng (PCG64)"


@dataclass(frozen=True)
class ZeroIC:
    def describe(self) -> str:
        return "zero"


@dataclass(frozen=True)
class RandomIC:
    seed: int = 0
    amplitude: float = 1.0

    def describe(self) -> str:
        return f"random:{self.seed}:{self.amplitude!r}"


@dataclass(frozen=True)
class SingleModeIC:
    kx: int = 1
    ky: int = 1
    amplitude: float = 1.0

    def describe(self) -> str:
        return f"single_mode:{self.kx}:{self.ky}:{self.amplitude!r}"


@dataclass(frozen=True)
class FileIC:
    path: str

    def describe(self) -> str:
        return f"file:{self.path}"


InitialCondition = ZeroIC | RandomIC | SingleModeIC | FileIC


def parse_ic(text: str, seed: int | None = None) -> InitialCondition:
    """Parse ``zero``, ``random[:seed[:amp]]``, ``single_mode[:kx:ky[:amp]]`` or ``file:PATH``.

    ``seed`` overrides the seed of a random condition.
    """
    kind, _, rest = text.strip().partition(":")
    kind = kind.lower()
    args = [a for a in rest.split(":") if a] if rest else []
    try:
        if kind == "zero":
            return ZeroIC()
        if kind == "random":
            s = int(args[0]) if args else 0
            amp = float(args[1]) if len(args) > 1 else 1.0
            if seed is not None:
                s = seed
            if amp < 0:
                raise ValueError("amplitude must be non-negative")
            return RandomIC(s, amp)
        if kind in ("single_mode", "single-mode", "mode"):
            kx = int(args[0]) if args else 1
            ky = int(args[1]) if len(args) > 1 else 1
            amp = float(args[2]) if len(args) > 2 else 1.0
            if amp < 0:
                raise ValueError("amplitude must be non-negative")
            return SingleModeIC(kx, ky, amp)
        if kind == "file":
            if not rest:
                raise ValueError("file initial condition needs a path")
            return FileIC(rest)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad initial condition {text!r}: {exc}") from exc
    raise ValueError(f"unknown initial condition kind {kind!r}")


def bubble(grid: Grid2D) -> np.ndarray:
    """Bilinear bubble x(Lx-x) y(Ly-y), normalised to peak 1 at the centre."""
    X, Y = grid.mesh()
    return X * (grid.Lx - X) * Y * (grid.Ly - Y) / (grid.Lx**2 * grid.Ly**2 / 16.0)


def make_initial(ic: InitialCondition, grid: Grid2D, seed: int | None = None) -> SimState:
    if isinstance(ic, ZeroIC):
        return SimState.zeros(grid)
    if isinstance(ic, SingleModeIC):
        A = ic.amplitude * sine_mode(grid, ic.kx, ic.ky)
        return SimState.from_arrays(grid, A.astype(np.complex128), np.zeros(grid.shape))
    if isinstance(ic, RandomIC):
        rng = np.random.default_rng(ic.seed if seed is None else seed)
        amp = ic.amplitude
        w = bubble(grid)
        phi = rng.uniform(-amp, amp, grid.shape) * w
        re = rng.uniform(-amp, amp, grid.shape)
        im = rng.uniform(-amp, amp, grid.shape)
        return SimState.from_arrays(grid, (re + 1j * im) * w, phi)
    if isinstance(ic, FileIC):
        path = Path(ic.path)
        if not path.is_file():
            raise FileNotFoundError(f"initial-condition snapshot {path} does not exist")
        state = read_snapshot(path)
        if state.grid != grid:
            raise ValueError(f"snapshot grid {state.grid} does not match requested {grid}")
        return state
    raise TypeError(f"unsupported initial condition {ic!r}")
