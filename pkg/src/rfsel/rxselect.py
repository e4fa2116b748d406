"""Receive-side selection and the receive-then-transmit pipeline.

At the receivers the two MIs decouple: the communication MI depends only
on the UE rows of ``H_c`` and the sensing MI is a plain sum of per-antenna
terms. Communication rows are therefore chosen with the transmit machinery
applied to ``H_c^T``; sensing antennas by a top-k ranking.
"""

from __future__ import annotations

import itertools

import numpy as np

from .beamspace import dbs_select_problem, top_k
from .errors import ModelError
from .linalg import logdet_psd
from .metrics import LinkParams
from .selection import SelectionSet
from .txselect import (
    EXHAUSTIVE_CAP,
    SelectionProblem,
    exhaustive_select_problem,
    fixed_select,
    gcs_select_problem,
    ges_select_problem,
    random_select,
)

METHODS = ("ges", "gcs", "dbs", "exhaustive", "random", "fixed", "full")


def receive_problem(scene, p: LinkParams) -> SelectionProblem:
    """Communication-only problem whose candidate chains are the UE rows of ``H_c``."""
    h = np.asarray(scene.h_c).T
    empty = np.zeros((0, h.shape[1], h.shape[1]), dtype=np.complex128)
    return SelectionProblem(h, empty, p.gamma, p.T, 1.0, 0.0, 1)


def rx_comm_select(scene, p: LinkParams, k_c: int, method: str = "gcs",
                   cap: int = EXHAUSTIVE_CAP) -> SelectionSet:
    """Choose ``k_c`` UE receive chains maximising the communication MI."""
    problem = receive_problem(scene, p)
    if method == "ges":
        return ges_select_problem(problem, k_c)
    if method == "gcs":
        return gcs_select_problem(problem, k_c)
    if method == "dbs":
        return dbs_select_problem(problem, k_c)
    if method == "exhaustive":
        return exhaustive_select_problem(problem, k_c, cap)
    raise ModelError(f"unknown receive method {method!r}")


def sensing_scores(scene, p: LinkParams) -> np.ndarray:
    """Per-antenna sensing MI ``log2|I + gamma T R_n|``."""
    eye = np.eye(scene.r_t.shape[-1])
    return np.array([logdet_psd(eye + p.gamma * p.T * r) for r in scene.r_t])


def rx_sense_select(scene, p: LinkParams, k_s: int) -> SelectionSet:
    """Keep the ``k_s`` sensing antennas with the largest individual MI term."""
    n_s = scene.r_t.shape[0]
    if not 1 <= k_s <= n_s:
        raise ModelError(f"k_s={k_s} outside 1..{n_s}")
    return SelectionSet.from_zero_based(top_k(sensing_scores(scene, p), k_s), n_s)


def rx_sense_exhaustive(scene, p: LinkParams, k_s: int) -> SelectionSet:
    """Enumerate all ``k_s``-subsets of sensing antennas; first best subset wins."""
    n_s = scene.r_t.shape[0]
    if not 1 <= k_s <= n_s:
        raise ModelError(f"k_s={k_s} outside 1..{n_s}")
    scores = sensing_scores(scene, p)
    best = max(itertools.combinations(range(n_s), k_s), key=lambda c: scores[list(c)].sum())
    return SelectionSet.from_zero_based(best, n_s)


def joint_pipeline(scene, p: LinkParams, k: int, k_c: int, k_s: int, method: str,
                   rng: np.random.Generator | None = None, cap: int = EXHAUSTIVE_CAP):
    """Select receive chains first, then ``k`` transmit chains given them.

    Returns ``(tx, rx_c, rx_s)``. ``scene`` may be an antenna-domain
    :class:`~rfsel.scene.Scene` or a beamspace scene.
    """
    n_t, n_c, n_s = scene.h_c.shape[1], scene.h_c.shape[0], scene.r_t.shape[0]
    if method == "full":
        return SelectionSet.full(n_t), SelectionSet.full(n_c), SelectionSet.full(n_s)
    if method == "random":
        if rng is None:
            raise ModelError("random selection needs an rng")
        rx_c = random_select(n_c, k_c, rng)
        rx_s = random_select(n_s, k_s, rng)
        return random_select(n_t, k, rng), rx_c, rx_s
    if method == "fixed":
        return fixed_select(n_t, k), fixed_select(n_c, k_c), fixed_select(n_s, k_s)

    if method in ("ges", "gcs", "dbs"):
        rx_c = rx_comm_select(scene, p, k_c, method)
        rx_s = rx_sense_select(scene, p, k_s)
    elif method == "exhaustive":
        rx_c = rx_comm_select(scene, p, k_c, "exhaustive", cap)
        rx_s = rx_sense_exhaustive(scene, p, k_s)
    else:
        raise ModelError(f"unknown method {method!r}; expected one of {METHODS}")

    problem = SelectionProblem.from_scene(scene, p, rx_c, rx_s)
    if method == "ges":
        tx = ges_select_problem(problem, k)
    elif method == "gcs":
        tx = gcs_select_problem(problem, k)
    elif method == "dbs":
        tx = dbs_select_problem(problem, k)
    else:
        tx = exhaustive_select_problem(problem, k, cap)
    return tx, rx_c, rx_s
