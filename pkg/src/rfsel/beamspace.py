"""Fixed DFT analog beamforming and beam selection for hybrid arrays.

With an ``N_t x M`` analog combiner ``U`` the greedy selectors run
unchanged on the effective channel ``H_c U`` and covariances ``U^H R U``;
:func:`dbs_select` is the single-pass shortcut that ranks beams by the
diagonals of ``I + g H~^H H~`` and ``I + gT R~_n`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .metrics import LinkParams
from .selection import SelectionSet
from .txselect import SelectionProblem


@dataclass(frozen=True)
class BeamCodebook:
    U: np.ndarray

    @property
    def n_beams(self) -> int:
        return self.U.shape[1]


def build_codebook(n_t: int, m: int) -> BeamCodebook:
    """``M`` evenly spaced DFT beams; column ``m`` is ``exp(-j 2 pi k (m-1)/M) / sqrt(N_t)``."""
    if not 1 <= m <= n_t:
        raise ModelError(f"beam count {m} outside 1..{n_t}")
    k = np.arange(n_t)[:, None]
    cols = np.arange(m)[None, :]
    return BeamCodebook(np.exp(-2j * np.pi * k * cols / m) / np.sqrt(n_t))


@dataclass
class BeamspaceScene:
    """Effective channel ``h_c = H_c U`` and covariances ``r_t[n] = U^H R_n U``.

    ``d`` and ``e`` hold the diagonals ``1 + g ||h~_j||^2`` and
    ``1 + gT [R~_n]_jj`` for the link parameters used at construction.
    """

    h_c: np.ndarray
    r_t: np.ndarray
    d: np.ndarray
    e: np.ndarray

    @property
    def n_t(self) -> int:
        return self.h_c.shape[1]

    @property
    def n_c(self) -> int:
        return self.h_c.shape[0]

    @property
    def n_s(self) -> int:
        return self.r_t.shape[0]


def to_beamspace(scene, cb: BeamCodebook, p: LinkParams) -> BeamspaceScene:
    U = cb.U
    if U.shape[0] != scene.h_c.shape[1]:
        raise ModelError(f"codebook has {U.shape[0]} rows, scene has {scene.h_c.shape[1]} antennas")
    h = scene.h_c @ U
    r = U.conj().T @ scene.r_t @ U
    r = 0.5 * (r + r.conj().transpose(0, 2, 1))
    d, e = diagonal_factors(h, r, p.gamma, p.T)
    return BeamspaceScene(h, r, d, e)


def diagonal_factors(h, r, gamma: float, T: int):
    """Per-beam ``1 + g ||h_j||^2`` and per-target ``1 + gT [R_n]_jj``."""
    d = 1.0 + gamma * np.sum(np.abs(h) ** 2, axis=0)
    e = 1.0 + gamma * T * np.real(np.diagonal(r, axis1=-2, axis2=-1))
    return d, np.atleast_2d(e) if len(r) else np.ones((0, h.shape[1]))


def dbs_scores(problem: SelectionProblem) -> np.ndarray:
    """``w_c log2 d_j + (w_s/N_s) sum_n log2 e_nj`` for every candidate beam."""
    d, e = diagonal_factors(problem.h, problem.r, problem.gamma, problem.T)
    score = np.zeros(problem.n)
    if problem.omega_c > 0:
        score += problem.omega_c * np.log2(d)
    if problem.omega_s > 0 and len(e):
        score += problem.omega_s / problem.n_s_norm * np.sum(np.log2(e), axis=0)
    return score


def top_k(scores, k: int) -> np.ndarray:
    """Indices of the ``k`` largest scores; ties keep the lower index."""
    scores = np.asarray(scores, dtype=float)
    order = np.lexsort((np.arange(scores.size), -scores))
    return np.sort(order[:k])


def dbs_select_problem(problem: SelectionProblem, k: int) -> SelectionSet:
    if not 1 <= k <= problem.n:
        raise ModelError(f"k={k} outside 1..{problem.n}")
    return SelectionSet.from_zero_based(top_k(dbs_scores(problem), k), problem.n)


def dbs_select(bs, p: LinkParams, k: int, *, rx_c=None, rx_s=None) -> SelectionSet:
    """Keep the ``k`` beams with the largest diagonal contribution, in one pass."""
    return dbs_select_problem(SelectionProblem.from_scene(bs, p, rx_c, rx_s), k)
