import numpy as np

from chevron.core import SimState


def random_state(grid, rng, amp=0.5, t=0.0):
    A = amp * (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    phi = amp * rng.standard_normal(grid.shape)
    return SimState.from_arrays(grid, A, phi, t)


def smooth_vortex_free(grid, rng, floor=0.3):
    """A = rho e^{i psi} with rho >= floor and a smooth multi-turn phase."""
    X, Y = grid.mesh()
    a = rng.uniform(0.2, 1.0, 4)
    rho = floor + a[0] * (1 + np.sin(2 * np.pi * X * a[1] + Y)) ** 2 / 4
    psi = 6 * a[2] * X + 9 * a[3] * Y * Y + np.cos(3 * X * Y)
    phi = rng.uniform(-1, 1) * np.cos(np.pi * X) * np.sin(2 * Y)
    return SimState.from_arrays(grid, rho * np.exp(1j * psi), phi)


# one "criterion N: PASS|FAIL ..." line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
