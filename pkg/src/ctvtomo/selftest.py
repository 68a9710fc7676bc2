"""Quick numerical self-checks: operator adjoints and frame invariants.

These are the same checks the test suite runs, packaged so a deployed
installation can verify itself (``ctvtomo selftest``) without pytest.
Each check prints one PASS/FAIL line; the suite passes only if all do.
"""
from __future__ import annotations

import sys

import numpy as np

from .diffops import AngularGradient, AxialGradient, AxisGradient, RadialGradient, build_local_frame
from .geometry import compute_angle_field, make_grid
from .operators import Diagonal, Identity, operator_norm
from .projector import ParallelProjector, make_scan_geometry
from .regularizer import prox_l1_conjugate

_GRIDS = ((6, 5, 3), (8, 8, 4), (13, 11, 2))
_ANGLES = (18.0, 162.0, 234.0, 306.0)


def _adjoint_error(op, rng) -> float:
    x = rng.standard_normal(op.domain_shape)
    u = rng.standard_normal(op.range_shape)
    lhs = float(np.vdot(op(x), u))
    rhs = float(np.vdot(x, op.adjoint(u)))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def run_selftest(seed: int = 0, stream=None) -> bool:
    """Run all checks, print one line per check, return overall success."""
    stream = stream if stream is not None else sys.stdout
    rng = np.random.default_rng(seed)
    results = []

    def check(name, ok, detail):
        results.append(ok)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=stream)

    for dims in _GRIDS:
        grid = make_grid(*dims, spacing=0.1)
        geom = make_scan_geometry(grid, _ANGLES, 0.06)
        err = _adjoint_error(ParallelProjector(grid, geom), rng)
        check(f"projector adjoint {dims}", err <= 1e-6, f"rel err {err:.3e}")

        frame = build_local_frame(compute_angle_field(grid))
        for name, op in (
            ("angular", AngularGradient(frame)),
            ("radial", RadialGradient(frame)),
            ("axial", AxialGradient(grid)),
        ):
            err = _adjoint_error(op, rng)
            check(f"{name} gradient adjoint {dims}", err <= 1e-10, f"rel err {err:.3e}")

    grid = make_grid(32, 32, 4, 0.1)
    frame = build_local_frame(compute_angle_field(grid))
    x = rng.standard_normal(grid.shape)
    lhs = AngularGradient(frame)(x) ** 2 + RadialGradient(frame)(x) ** 2
    rhs = AxisGradient(grid, 0)(x) ** 2 + AxisGradient(grid, 1)(x) ** 2
    err = float(np.max(np.abs(lhs - rhs)) / rhs.max())
    check("rotation magnitude identity", err <= 1e-12, f"rel err {err:.3e}")

    err = abs(operator_norm(Identity((5, 5, 5)), iters=5, seed=seed) - 1.0)
    check("operator norm of identity", err <= 1e-6, f"abs err {err:.3e}")
    err = abs(operator_norm(Diagonal(3.0 * np.ones((4, 4, 2))), iters=5, seed=seed) - 3.0)
    check("operator norm of 3x scaling", err <= 1e-6, f"abs err {err:.3e}")

    clamped = prox_l1_conjugate(np.array([-3.0, 0.5, 5.0]), 2.0)
    ok = np.array_equal(clamped, [-2.0, 0.5, 2.0])
    check("l1-conjugate prox clamp", ok, f"got {clamped.tolist()}")

    return all(results)
