"""Transmit RF-chain selection by backward greedy removal.

Both greedy selectors start from the full chain set and repeatedly drop
the chain whose removal costs the least weighted normalised MI. They differ
only in how the per-chain cost is tracked:

* GES keeps ``A = (I + g H H^H)^{-1}`` and, per sensing antenna, a factored
  ``B_n`` built from the nonzero eigenpairs of ``R_n``; removals are
  Sherman-Morrison downdates.
* GCS keeps ``D^{-1} = (I + g H^H H)^{-1}`` and ``E_n^{-1}``; a removal
  deletes one row/column of each inverse via a Schur complement.

Scores are kept in the log2 domain, so the removal rule
``argmax (1 - g a_j)^{w_c} prod_n (1 - gT b_nj)^{w_s/N_s}`` becomes a sum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, floor
from typing import Callable

import numpy as np

from .errors import CapacityError, ModelError, NumericError, SingularUpdateError
from .linalg import (
    PIVOT_TOL,
    PSD_TOL,
    hermitian_evd,
    hermitian_inverse,
    remove_rowcol_inverse,
)
from .metrics import LinkParams, comm_mi, objective_value, sensing_mi
from .selection import SelectionSet

EXHAUSTIVE_CAP = 200_000
REFRESH_EVERY = 8


@dataclass
class SelectionProblem:
    """Candidate chains are the columns of ``h`` and of each ``r[n]``.

    ``n_s_norm`` is the sensing normaliser ``N_s``; it stays at the full
    sensing-antenna count even when ``r`` holds only a selected subset.
    """

    h: np.ndarray
    r: np.ndarray
    gamma: float
    T: int
    omega_c: float
    omega_s: float
    n_s_norm: int

    @property
    def n(self) -> int:
        return self.h.shape[1]

    @property
    def params(self) -> LinkParams:
        return LinkParams(self.gamma, self.T, self.omega_c, self.omega_s)

    @classmethod
    def from_scene(cls, scene, p: LinkParams, rx_c: SelectionSet | None = None,
                   rx_s: SelectionSet | None = None) -> SelectionProblem:
        """Transmit problem on ``scene`` restricted to the given receive chains.

        ``scene`` is anything with ``h_c`` and ``r_t`` (antenna or beamspace).
        """
        h = np.asarray(scene.h_c, dtype=np.complex128)
        r = np.asarray(scene.r_t, dtype=np.complex128)
        n_s = r.shape[0]
        if rx_c is not None:
            h = h[rx_c.zero_based]
        if rx_s is not None:
            r = r[rx_s.zero_based]
        return cls(h, r, p.gamma, p.T, p.omega_c, p.omega_s, n_s)

    def comm_mi(self, idx) -> float:
        return comm_mi(self.h[:, idx], self.params)

    def sensing_mi(self, idx) -> float:
        idx = np.asarray(idx, dtype=np.intp)
        return sensing_mi(self.r[:, idx[:, None], idx[None, :]], self.params)

    def objective(self, idx) -> float:
        """Weighted normalised MI of the chain subset ``idx`` (0-based), from scratch."""
        return objective_value(self.comm_mi(idx), self.sensing_mi(idx), self.params, self.n_s_norm)


def _log_score(problem: SelectionProblem, comm_factor, sense_factors) -> np.ndarray:
    # zero weights drop their factor entirely (x**0 == 1)
    score = np.zeros(len(comm_factor))
    if problem.omega_c > 0:
        score += problem.omega_c * np.log2(comm_factor)
    if problem.omega_s > 0 and len(sense_factors):
        score += problem.omega_s / problem.n_s_norm * np.sum(np.log2(sense_factors), axis=0)
    return score


def covariance_factor(r) -> np.ndarray:
    """``G`` with ``R = G G^H`` from the eigenpairs above ``PSD_TOL * lambda_max``."""
    w, v = hermitian_evd(r)
    if w.size == 0 or w[0] <= 0:
        return np.zeros((r.shape[0], 0), dtype=np.complex128)
    keep = w > PSD_TOL * w[0]
    return v[:, keep] * np.sqrt(w[keep])


@dataclass
class GesState:
    """Eigen-based greedy state over the chains in ``remaining``.

    ``alpha`` and ``beta`` are indexed by original chain number; only the
    entries for ``remaining`` are meaningful.
    """

    problem: SelectionProblem
    remaining: list[int]
    factors: list[np.ndarray]
    A: np.ndarray
    alpha: np.ndarray
    B: list[np.ndarray]
    beta: np.ndarray

    @classmethod
    def from_scratch(cls, problem: SelectionProblem, remaining=None, factors=None) -> GesState:
        remaining = list(range(problem.n)) if remaining is None else list(remaining)
        if factors is None:
            factors = [covariance_factor(r) for r in problem.r]
        g, gt = problem.gamma, problem.gamma * problem.T
        h_rem = problem.h[:, remaining]
        A = hermitian_inverse(np.eye(problem.h.shape[0]) + g * h_rem @ h_rem.conj().T)
        alpha = np.zeros(problem.n)
        alpha[remaining] = np.real(np.einsum("ij,ik,kj->j", h_rem.conj(), A, h_rem))
        B, beta = [], np.zeros((len(factors), problem.n))
        for n, G in enumerate(factors):
            g_rem = G[remaining]
            Bn = hermitian_inverse(np.eye(G.shape[1]) + gt * g_rem.conj().T @ g_rem)
            B.append(Bn)
            beta[n, remaining] = np.real(np.einsum("jk,kl,jl->j", g_rem, Bn, g_rem.conj()))
        return cls(problem, remaining, factors, A, alpha, B, beta)

    def comm_factors(self) -> np.ndarray:
        """``1 - gamma alpha_j`` for the remaining chains."""
        return 1.0 - self.problem.gamma * self.alpha[self.remaining]

    def sense_factors(self) -> np.ndarray:
        """``1 - gamma T beta_nj``, shape ``(n_targets, len(remaining))``."""
        return 1.0 - self.problem.gamma * self.problem.T * self.beta[:, self.remaining]

    def scores(self) -> np.ndarray:
        return _log_score(self.problem, self.comm_factors(), self.sense_factors())

    def remove(self, chain: int) -> None:
        """Drop ``chain``: ``A += a a^H``, ``alpha_j += |h_j^H a|^2``, and likewise per target."""
        problem = self.problem
        g, gt = problem.gamma, problem.gamma * problem.T
        den = 1.0 - g * self.alpha[chain]
        if den < PIVOT_TOL:
            raise SingularUpdateError(f"removal factor {den:.3e}")
        self.remaining.remove(chain)
        rem = self.remaining
        a = np.sqrt(g / den) * (self.A @ problem.h[:, chain])
        self.A = self.A + np.outer(a, a.conj())
        self.alpha[rem] += np.abs(problem.h[:, rem].conj().T @ a) ** 2
        for n, G in enumerate(self.factors):
            if G.shape[1] == 0:
                continue
            den = 1.0 - gt * self.beta[n, chain]
            if den < PIVOT_TOL:
                raise SingularUpdateError(f"removal factor {den:.3e}")
            b = np.sqrt(gt / den) * (self.B[n] @ G[chain].conj())
            self.B[n] = self.B[n] + np.outer(b, b.conj())
            self.beta[n, rem] += np.abs(G[rem] @ b) ** 2

    def refreshed(self) -> GesState:
        return GesState.from_scratch(self.problem, self.remaining, self.factors)


@dataclass
class GcsState:
    """Cofactor-based greedy state; ``D_inv`` and ``E_inv`` follow ``remaining`` order."""

    problem: SelectionProblem
    remaining: list[int]
    D_inv: np.ndarray
    E_inv: list[np.ndarray]

    @classmethod
    def from_scratch(cls, problem: SelectionProblem, remaining=None) -> GcsState:
        remaining = list(range(problem.n)) if remaining is None else list(remaining)
        k = len(remaining)
        h_rem = problem.h[:, remaining]
        D_inv = hermitian_inverse(np.eye(k) + problem.gamma * h_rem.conj().T @ h_rem)
        gt = problem.gamma * problem.T
        E_inv = [hermitian_inverse(np.eye(k) + gt * r[np.ix_(remaining, remaining)]) for r in problem.r]
        return cls(problem, remaining, D_inv, E_inv)

    def comm_factors(self) -> np.ndarray:
        """``delta_j``: diagonal of ``D^{-1}``."""
        return np.real(np.diag(self.D_inv)).copy()

    def sense_factors(self) -> np.ndarray:
        """``epsilon_nj``: diagonals of the ``E_n^{-1}``."""
        if not self.E_inv:
            return np.zeros((0, len(self.remaining)))
        return np.real(np.array([np.diag(e) for e in self.E_inv]))

    def scores(self) -> np.ndarray:
        return _log_score(self.problem, self.comm_factors(), self.sense_factors())

    def remove(self, chain: int) -> None:
        pos = self.remaining.index(chain)
        self.D_inv = remove_rowcol_inverse(self.D_inv, pos)
        self.E_inv = [remove_rowcol_inverse(e, pos) for e in self.E_inv]
        self.remaining.pop(pos)

    def refreshed(self) -> GcsState:
        return GcsState.from_scratch(self.problem, self.remaining)


@dataclass
class RemovalStep:
    remaining: list[int]
    scores: np.ndarray
    removed: int


def greedy_remove(state, k: int, *, refresh_every: int | None = REFRESH_EVERY,
                  trace: list | None = None, hook: Callable | None = None):
    """Run backward greedy removal on ``state`` until ``k`` chains remain.

    Returns the final state. Ties go to the lowest remaining chain index.
    ``hook(state)`` is called after every update (test instrumentation).
    """
    if not 1 <= k <= len(state.remaining):
        raise ModelError(f"k={k} outside 1..{len(state.remaining)}")
    removals = 0
    while len(state.remaining) > k:
        scores = state.scores()
        pos = int(np.argmax(scores))
        chain = state.remaining[pos]
        if trace is not None:
            trace.append(RemovalStep(list(state.remaining), scores, chain))
        if len(state.remaining) - 1 == k:
            state.remaining.remove(chain)
            break
        removals += 1
        try:
            state.remove(chain)
        except NumericError:
            if chain in state.remaining:
                state.remaining.remove(chain)
            state = state.refreshed()
        else:
            if refresh_every and removals % refresh_every == 0:
                state = state.refreshed()
        if hook is not None:
            hook(state)
    return state


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise ModelError(f"k={k} outside 1..{n}")


def ges_select(scene, p: LinkParams, k: int, *, rx_c=None, rx_s=None,
               refresh_every: int | None = REFRESH_EVERY, trace=None, hook=None) -> SelectionSet:
    """Greedy eigen-based selection of ``k`` transmit chains."""
    problem = SelectionProblem.from_scene(scene, p, rx_c, rx_s)
    return ges_select_problem(problem, k, refresh_every=refresh_every, trace=trace, hook=hook)


def ges_select_problem(problem: SelectionProblem, k: int, **kw) -> SelectionSet:
    _check_k(k, problem.n)
    if k == problem.n:
        return SelectionSet.full(problem.n)
    state = greedy_remove(GesState.from_scratch(problem), k, **kw)
    return SelectionSet.from_zero_based(state.remaining, problem.n)


def gcs_select(scene, p: LinkParams, k: int, *, rx_c=None, rx_s=None,
               refresh_every: int | None = REFRESH_EVERY, trace=None, hook=None) -> SelectionSet:
    """Greedy cofactor-based selection of ``k`` transmit chains."""
    problem = SelectionProblem.from_scene(scene, p, rx_c, rx_s)
    return gcs_select_problem(problem, k, refresh_every=refresh_every, trace=trace, hook=hook)


def gcs_select_problem(problem: SelectionProblem, k: int, **kw) -> SelectionSet:
    _check_k(k, problem.n)
    if k == problem.n:
        return SelectionSet.full(problem.n)
    state = greedy_remove(GcsState.from_scratch(problem), k, **kw)
    return SelectionSet.from_zero_based(state.remaining, problem.n)


def _batched_log2det(mats: np.ndarray) -> np.ndarray:
    _, logabs = np.linalg.slogdet(mats)
    return logabs / np.log(2.0)


def subset_objectives(problem: SelectionProblem, subsets: np.ndarray) -> np.ndarray:
    """Objective of every row of ``subsets`` (0-based chain indices), batched."""
    subsets = np.asarray(subsets, dtype=np.intp)
    c, k = subsets.shape
    out = np.zeros(c)
    if problem.omega_c > 0:
        hs = problem.h[:, subsets].transpose(1, 0, 2)  # (c, n_r, k)
        if hs.shape[1] <= k:
            gram = hs @ hs.conj().transpose(0, 2, 1)
        else:
            gram = hs.conj().transpose(0, 2, 1) @ hs
        eye = np.eye(gram.shape[-1])
        out += problem.omega_c * _batched_log2det(eye + problem.gamma * gram)
    if problem.omega_s > 0 and len(problem.r):
        gt = problem.gamma * problem.T
        eye = np.eye(k)
        rows, cols = subsets[:, :, None], subsets[:, None, :]
        for r in problem.r:
            out += problem.omega_s / problem.n_s_norm * _batched_log2det(eye + gt * r[rows, cols])
    return out


def exhaustive_select_problem(problem: SelectionProblem, k: int, cap: int = EXHAUSTIVE_CAP,
                              chunk: int = 4096) -> SelectionSet:
    _check_k(k, problem.n)
    total = comb(problem.n, k)
    if total > cap:
        raise CapacityError(f"C({problem.n},{k}) = {total} exceeds cap {cap}")
    if k == problem.n:
        return SelectionSet.full(problem.n)
    best_val, best = -np.inf, None
    combos = itertools.combinations(range(problem.n), k)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        vals = subset_objectives(problem, block)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best = vals[i], block[i]
    return SelectionSet.from_zero_based(best, problem.n)


def exhaustive_select(scene, p: LinkParams, k: int, *, rx_c=None, rx_s=None,
                      cap: int = EXHAUSTIVE_CAP) -> SelectionSet:
    """The exact objective-maximising ``k``-subset; ties go to the lexicographically first."""
    return exhaustive_select_problem(SelectionProblem.from_scene(scene, p, rx_c, rx_s), k, cap)


def random_select(universe: int, k: int, rng: np.random.Generator) -> SelectionSet:
    """Uniformly random ``k``-subset of ``1..universe``."""
    _check_k(k, universe)
    return SelectionSet.from_zero_based(rng.choice(universe, size=k, replace=False), universe)


def fixed_select(universe: int, k: int) -> SelectionSet:
    """Evenly spaced chains ``round(1 + (i - 1) * universe / k)``, ``i = 1..k``."""
    _check_k(k, universe)
    chosen: list[int] = []
    taken = set()
    for i in range(k):
        idx = int(floor(1 + i * universe / k + 0.5))
        while idx in taken:
            idx = idx % universe + 1
        taken.add(idx)
        chosen.append(idx)
    return SelectionSet(tuple(sorted(chosen)), universe)
