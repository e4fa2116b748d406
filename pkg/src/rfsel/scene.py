"""Random channel and target-response realisations for a bistatic MIMO ISAC link."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError
from .selection import SelectionSet


@dataclass
class GeometryConfig:
    """Array sizes and propagation parameters for scene generation.

    ``distances`` optionally pins the sensing-antenna/target distance grid
    (rows index sensing antennas, columns index targets); otherwise every
    entry is drawn uniformly from ``distance_range`` per scene.
    """

    n_t: int = 16
    n_c: int = 8
    n_s: int = 8
    n_paths: int = 8
    sector: tuple[float, float] = (-np.pi / 3, np.pi / 3)
    wavelength: float = 0.1
    pathloss_exponent: float = 2.0
    distance_range: tuple[float, float] = (50.0, 200.0)
    distances: np.ndarray | None = None
    reflection_powers: np.ndarray | None = None

    def __post_init__(self):
        if min(self.n_t, self.n_c, self.n_s, self.n_paths) < 1:
            raise ModelError("all array sizes and the path count must be >= 1")
        lo, hi = self.sector
        if not (-np.pi / 2 < lo <= hi < np.pi / 2):
            raise ModelError(f"angular sector {self.sector} must lie inside (-pi/2, pi/2)")
        if self.wavelength <= 0 or self.pathloss_exponent < 0:
            raise ModelError("wavelength must be > 0 and path-loss exponent >= 0")
        dlo, dhi = self.distance_range
        if not 0 < dlo <= dhi:
            raise ModelError(f"bad distance range {self.distance_range}")
        if self.distances is not None:
            d = np.asarray(self.distances, dtype=float)
            if d.shape != (self.n_s, self.n_s) or np.any(d <= 0):
                raise ModelError("distances must be a positive n_s x n_s grid")
            self.distances = d
        if self.reflection_powers is not None:
            s = np.asarray(self.reflection_powers, dtype=float)
            if s.shape != (self.n_s,) or np.any(s <= 0):
                raise ModelError("reflection_powers must be n_s positive values")
            self.reflection_powers = s


@dataclass
class Scene:
    """One channel realisation.

    ``r_t`` stacks the per-sensing-antenna transmit covariances with shape
    ``(n_s, n_t, n_t)``; ``kappa[n, i]`` weights target ``i`` at antenna ``n``.
    """

    h_c: np.ndarray
    h_s: np.ndarray
    r_t: np.ndarray
    aod_comm: np.ndarray
    aoa_comm: np.ndarray
    aod_sense: np.ndarray
    a_c: np.ndarray
    a_s: np.ndarray
    kappa: np.ndarray
    distances: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def n_t(self) -> int:
        return self.h_c.shape[1]

    @property
    def n_c(self) -> int:
        return self.h_c.shape[0]

    @property
    def n_s(self) -> int:
        return self.r_t.shape[0]


def steering_tx(theta: float, n: int) -> np.ndarray:
    """Half-wavelength ULA response ``exp(-j pi k sin(theta))`` for ``k = 0..n-1``."""
    if n < 1:
        raise ModelError("array size must be >= 1")
    return np.exp(-1j * np.pi * np.arange(n) * np.sin(theta))


steering_rx = steering_tx


def steering_matrix(thetas, n: int) -> np.ndarray:
    """Stack steering vectors for ``thetas`` as the columns of an ``n x len(thetas)`` matrix."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    return np.exp(-1j * np.pi * np.outer(np.arange(n), np.sin(thetas)))


def build_scene(
    n_t: int,
    n_c: int,
    aod_comm,
    aoa_comm,
    a_c,
    aod_sense,
    a_s,
    distances,
    wavelength: float = 0.1,
    pathloss_exponent: float = 2.0,
    reflection_powers=None,
) -> Scene:
    """Assemble a scene from explicit angles, gains and distances (no randomness)."""
    aod_comm = np.asarray(aod_comm, dtype=float)
    aoa_comm = np.asarray(aoa_comm, dtype=float)
    a_c = np.asarray(a_c, dtype=np.complex128)
    aod_sense = np.asarray(aod_sense, dtype=float)
    a_s = np.asarray(a_s, dtype=np.complex128)
    d = np.asarray(distances, dtype=float)
    n_s = aod_sense.size
    if not (aod_comm.size == aoa_comm.size == a_c.size):
        raise ModelError("path angle and gain arrays must have equal length")
    if a_s.size != n_s or d.shape != (n_s, n_s):
        raise ModelError("sensing arrays must match the number of targets")
    sigma2 = np.ones(n_s) if reflection_powers is None else np.asarray(reflection_powers, float)

    t_c = steering_matrix(aod_comm, n_t)
    r_c = steering_matrix(aoa_comm, n_c)
    h_c = (r_c * a_c) @ t_c.conj().T

    # column i of r_bar is the response of target i across sensing antennas
    r_bar = d ** (-pathloss_exponent / 2) * np.exp(-2j * np.pi * d / wavelength)
    t_s = steering_matrix(aod_sense, n_t)
    h_s = (r_bar * a_s) @ t_s.conj().T
    kappa = sigma2[None, :] * np.abs(r_bar) ** 2
    r_t = np.einsum("ki,ni,li->nkl", t_s, kappa, t_s.conj())
    r_t = 0.5 * (r_t + r_t.conj().transpose(0, 2, 1))
    return Scene(h_c, h_s, r_t, aod_comm, aoa_comm, aod_sense, a_c, a_s, kappa, d)


def _cn(rng: np.random.Generator, size, var=1.0) -> np.ndarray:
    scale = np.sqrt(np.asarray(var, dtype=float) / 2)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def generate_scene(cfg: GeometryConfig, rng: np.random.Generator) -> Scene:
    """Draw one scene: uniform angles on the sector, CN(0,1) path gains, Swerling-I targets."""
    lo, hi = cfg.sector
    aod_comm = rng.uniform(lo, hi, cfg.n_paths)
    aoa_comm = rng.uniform(lo, hi, cfg.n_paths)
    a_c = _cn(rng, cfg.n_paths)
    sigma2 = np.ones(cfg.n_s) if cfg.reflection_powers is None else cfg.reflection_powers
    aod_sense = rng.uniform(lo, hi, cfg.n_s)
    a_s = _cn(rng, cfg.n_s, sigma2)
    if cfg.distances is None:
        d = rng.uniform(*cfg.distance_range, size=(cfg.n_s, cfg.n_s))
    else:
        d = cfg.distances
    return build_scene(
        cfg.n_t, cfg.n_c, aod_comm, aoa_comm, a_c, aod_sense, a_s, d,
        cfg.wavelength, cfg.pathloss_exponent, sigma2,
    )


def subselect_columns(m, sel: SelectionSet) -> np.ndarray:
    """``m @ S(sel)``: the selected columns of ``m`` in ``sel`` order."""
    m = np.asarray(m)
    if sel.universe_size != m.shape[-1]:
        raise ModelError(f"selection over {sel.universe_size} chains, matrix has {m.shape[-1]} columns")
    return m[..., sel.zero_based]


def subselect_rows(m, sel: SelectionSet) -> np.ndarray:
    """``S_r(sel)^T @ m``: the selected rows of ``m``."""
    m = np.asarray(m)
    if sel.universe_size != m.shape[0]:
        raise ModelError(f"selection over {sel.universe_size} chains, matrix has {m.shape[0]} rows")
    return m[sel.zero_based]


def subselect_covariance(r, sel: SelectionSet) -> np.ndarray:
    """``S^H R S`` for one covariance or a stack of them."""
    r = np.asarray(r)
    if sel.universe_size != r.shape[-1]:
        raise ModelError(f"selection over {sel.universe_size} chains, covariance is {r.shape[-1]} wide")
    idx = sel.zero_based
    return r[..., idx[:, None], idx[None, :]]


_COMPLEX_FIELDS = ("h_c", "h_s", "r_t", "a_c", "a_s")
_REAL_FIELDS = ("aod_comm", "aoa_comm", "aod_sense", "kappa", "distances")


def _pairs(z: np.ndarray):
    return np.stack([z.real, z.imag], axis=-1).tolist()


def scene_to_dict(scene: Scene) -> dict:
    """JSON-ready dict; complex entries become ``[re, im]`` pairs."""
    out = {name: _pairs(np.asarray(getattr(scene, name))) for name in _COMPLEX_FIELDS}
    out.update({name: np.asarray(getattr(scene, name)).tolist() for name in _REAL_FIELDS})
    return out


def scene_from_dict(doc: dict) -> Scene:
    kw = {}
    for name in _COMPLEX_FIELDS:
        arr = np.asarray(doc[name], dtype=float)
        kw[name] = arr[..., 0] + 1j * arr[..., 1]
    for name in _REAL_FIELDS:
        kw[name] = np.asarray(doc[name], dtype=float)
    return Scene(**kw)


def dump_scene(scene: Scene, path) -> None:
    with open(path, "w") as fh:
        json.dump(scene_to_dict(scene), fh)


def load_scene(path) -> Scene:
    with open(path) as fh:
        return scene_from_dict(json.load(fh))
