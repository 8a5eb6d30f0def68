"""Per-index cost kernels, compiled when available.

The Cython extension ``_ckernels`` is imported if it was built; otherwise,
or when the environment variable ``OPTMERGE_PURE_PYTHON`` is set to ``1``,
the pure-Python twin ``_pykernels`` is used. ``BACKEND`` names the choice.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _pykernels

if os.environ.get("OPTMERGE_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"


def compiled_available() -> bool:
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return False
    return True


@dataclass(frozen=True)
class CostModel:
    """Everything the kernels need to price a (merging time, speed) pair for one index."""

    x0: float
    v0: float
    t0: float
    L: float
    alpha: float
    undisrupted: float
    disrupts: bool
    v_dk: float
    u_bar: float
    beta: float
    dz0: tuple[float, ...]
    dv: tuple[float, ...]

    def packed(self):
        model = np.array(
            [self.x0, self.v0, self.t0, self.L, self.alpha, self.undisrupted,
             1.0 if self.disrupts else 0.0, self.v_dk, self.u_bar, self.beta],
            dtype=float,
        )
        return model, np.array(self.dz0, dtype=float), np.array(self.dv, dtype=float)


def region_array(region) -> np.ndarray:
    return np.array(
        [region.v_lo, region.v_hi, region.t_lower_slope, region.t_lower_intercept,
         region.t_floor, region.t_hi],
        dtype=float,
    )


def _args(model: CostModel, impl):
    m, dz0, dv = model.packed()
    if impl is _pykernels:
        return list(m), list(dz0), list(dv)
    return m, dz0, dv


def point_cost(model: CostModel, t: float, v: float, impl=None) -> float:
    impl = impl or _impl
    return impl.point_cost(*_args(model, impl), float(t), float(v))


def grid_min(model: CostModel, region, n_t: int, n_v: int, impl=None):
    impl = impl or _impl
    rg = region_array(region)
    return impl.grid_min(*_args(model, impl), list(rg) if impl is _pykernels else rg, n_t, n_v)


def refine(model: CostModel, region, v, s, h_v, h_s, tol_v, tol_t, max_sweeps=500, impl=None):
    impl = impl or _impl
    rg = region_array(region)
    return impl.refine(
        *_args(model, impl), list(rg) if impl is _pykernels else rg,
        float(v), float(s), float(h_v), float(h_s), float(tol_v), float(tol_t), int(max_sweeps),
    )


def implementations():
    """Available backends keyed by name, for tests and benchmarks."""
    impls = {"python": _pykernels}
    try:
        from . import _ckernels

        impls["cython"] = _ckernels
    except ImportError:
        pass
    return impls
