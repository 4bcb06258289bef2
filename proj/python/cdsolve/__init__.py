"""Coordinate descent for structured nonsmooth convex problems.

    min_x 1/2 x'Qx + sum_j cf_j f_j(Af_j x - bf_j)
                   + sum_i cg_i g_i(Dg_i x_i - bg_i)
                   + sum_l ch_l h_l(Ah_l x - bh_l)

Build the problem with :class:`Problem` and run :func:`coordinate_descent`.
"""

from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version

import numpy as np
import scipy.sparse as sp

from . import _core

try:
    __version__ = version("cdsolve")
except PackageNotFoundError:
    __version__ = "0.3.0"

__all__ = ["Problem", "coordinate_descent", "__version__"]


def _csc(m):
    if m is None:
        return None
    a = sp.csc_matrix(m) if sp.issparse(m) else sp.csc_matrix(np.atleast_2d(np.asarray(m, dtype=float)))
    a.sort_indices()
    a.sum_duplicates()
    return (a.shape[0], a.shape[1], a.indptr, a.indices, a.data)


def _vec(v):
    return None if v is None else np.ravel(np.asarray(v, dtype=float))


class Problem:
    """A problem instance; matrices may be dense arrays or scipy sparse matrices."""

    def __init__(self, N, blocks=None, x_init=None, y_init=None, f=None, g=None, h=None,
                 cf=None, Af=None, bf=None, cg=None, Dg=None, bg=None, ch=None, Ah=None,
                 bh=None, Q=None, blocks_f=None, blocks_h=None):
        self._pb = _core.build(dict(
            N=int(N),
            blocks=blocks, blocks_f=blocks_f, blocks_h=blocks_h,
            f=None if f is None else list(f),
            g=None if g is None else list(g),
            h=None if h is None else list(h),
            cf=_vec(cf), cg=_vec(cg), ch=_vec(ch),
            bf=_vec(bf), bg=_vec(bg), bh=_vec(bh), Dg=_vec(Dg),
            x_init=_vec(x_init), y_init=_vec(y_init),
            Af=_csc(Af), Ah=_csc(Ah), Q=_csc(Q),
        ))

    @property
    def N(self):
        return self._pb.N

    @property
    def n_blocks(self):
        return self._pb.n_blocks

    @property
    def warnings(self):
        return list(self._pb.warnings)


@dataclass
class Result:
    x: np.ndarray
    y: np.ndarray
    trace: dict
    status: str
    iterations: int
    screened: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def coordinate_descent(pb, algo="pdcd", max_iter=1000, max_time=float("inf"), tol=1e-6,
                       print_period=10, sampling="uniform", seed=0, screening=False, **options):
    """Solve pb. Extra keyword options: safety, sigma, screening_period,
    refresh_period, gamma1, restart ('doubling' or 'fixed'), restart_period, verbose."""
    out = _core.solve(pb._pb, dict(algo=algo, max_iter=max_iter, max_time=max_time, tol=tol,
                                   print_period=print_period, sampling=sampling, seed=seed,
                                   screening=screening, **options))
    return Result(**out)
