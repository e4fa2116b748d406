"""Mutual-information metrics, the weighted objective and the circuit-power model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .linalg import logdet_psd
from .scene import Scene, subselect_covariance
from .selection import SelectionSet


@dataclass(frozen=True)
class LinkParams:
    """Slot count, linear transmit-power-to-noise ratio and objective weights."""

    gamma: float
    T: int = 64
    omega_c: float = 0.5
    omega_s: float | None = None

    def __post_init__(self):
        if self.omega_s is None:
            object.__setattr__(self, "omega_s", 1.0 - self.omega_c)
        if self.T < 1:
            raise ModelError("T must be >= 1")
        if not self.gamma > 0:
            raise ModelError("gamma must be positive")
        if not (0 <= self.omega_c <= 1 and 0 <= self.omega_s <= 1):
            raise ModelError("weights must lie in [0, 1]")
        if abs(self.omega_c + self.omega_s - 1.0) > 1e-12:
            raise ModelError("weights must sum to one")

    @classmethod
    def from_db(cls, snr_db: float, T: int = 64, omega_c: float = 0.5) -> LinkParams:
        return cls(gamma=10.0 ** (snr_db / 10.0), T=T, omega_c=omega_c)

    def with_weight(self, omega_c: float) -> LinkParams:
        return LinkParams(self.gamma, self.T, omega_c)


@dataclass(frozen=True)
class MIReport:
    comm_mi: float
    sensing_mi: float
    objective: float


def comm_mi(h, p: LinkParams) -> float:
    """``T log2|I + gamma H H^H|`` in bits, using the smaller Gram orientation."""
    h = np.asarray(h, dtype=np.complex128)
    if h.size == 0:
        return 0.0
    if h.shape[0] <= h.shape[1]:
        gram = h @ h.conj().T
    else:
        gram = h.conj().T @ h
    return max(p.T * logdet_psd(np.eye(gram.shape[0]) + p.gamma * gram), 0.0)


def sensing_mi(r_sel, p: LinkParams) -> float:
    """``sum_n log2|I + gamma T R_n|`` over a stack (or list) of covariances."""
    total = 0.0
    for r in r_sel:
        r = np.asarray(r, dtype=np.complex128)
        if r.size:
            total += logdet_psd(np.eye(r.shape[0]) + p.gamma * p.T * r)
    return max(total, 0.0)


def objective_value(i_c: float, i_s: float, p: LinkParams, n_s: int) -> float:
    """Weighted sum of normalised MI: ``(w_c / T) I_c + (w_s / N_s) I_s``."""
    return p.omega_c * i_c / p.T + p.omega_s * i_s / n_s


def weighted_objective(
    scene: Scene,
    tx_sel: SelectionSet,
    rx_c_sel: SelectionSet,
    rx_s_sel: SelectionSet,
    p: LinkParams,
) -> MIReport:
    """Objective of a (transmit, comm-receive, sensing-receive) selection.

    The sensing sum runs over the selected sensing antennas only, while the
    normalisation keeps the full sensing-antenna count.
    """
    for name, sel in (("tx", tx_sel), ("rx_c", rx_c_sel), ("rx_s", rx_s_sel)):
        if len(sel) == 0:
            raise ModelError(f"empty {name} selection")
    if rx_c_sel.universe_size != scene.n_c or rx_s_sel.universe_size != scene.n_s:
        raise ModelError("receive selections do not match the scene")
    tx = tx_sel.zero_based
    if tx_sel.universe_size != scene.h_c.shape[1]:
        raise ModelError("transmit selection does not match the scene")
    h = scene.h_c[np.ix_(rx_c_sel.zero_based, tx)]
    r = subselect_covariance(scene.r_t[rx_s_sel.zero_based], tx_sel)
    i_c = comm_mi(h, p)
    i_s = sensing_mi(r, p)
    return MIReport(i_c, i_s, objective_value(i_c, i_s, p, scene.n_s))


@dataclass(frozen=True)
class PowerModel:
    """Per-chain circuit power with exponential-in-bits converter models.

    ``P_DAC(b) = c_dac * f_s * 2**b`` and likewise for the ADCs.
    """

    p_lo: float = 22.5e-3
    p_rf: float = 31.6e-3
    f_s: float = 100e6
    dac_bits: int = 12
    adc_bits_c: int = 12
    adc_bits_s: int = 12
    c_dac: float = 1e-12
    c_adc: float = 1e-12

    def __post_init__(self):
        if min(self.p_lo, self.p_rf, self.f_s, self.c_dac, self.c_adc) <= 0:
            raise ModelError("power-model constants must be positive")
        if min(self.dac_bits, self.adc_bits_c, self.adc_bits_s) < 1:
            raise ModelError("converter resolutions must be >= 1 bit")

    def dac_power(self, bits: int | None = None) -> float:
        return self.c_dac * self.f_s * 2.0 ** (self.dac_bits if bits is None else bits)

    def adc_power(self, bits: int) -> float:
        return self.c_adc * self.f_s * 2.0 ** bits


def _count(sel) -> int:
    return sel if isinstance(sel, (int, np.integer)) else len(sel)


def circuit_power(pm: PowerModel, tx_sel, rx_c_sel, rx_s_sel) -> float:
    """Total circuit power of BS, UE and sensing receiver in watts.

    Each argument may be a :class:`SelectionSet` or a plain chain count.
    """
    p_bs = pm.p_lo + _count(tx_sel) * (pm.dac_power() + pm.p_rf)
    p_ue = pm.p_lo + _count(rx_c_sel) * (pm.adc_power(pm.adc_bits_c) + pm.p_rf)
    p_s = pm.p_lo + _count(rx_s_sel) * (pm.adc_power(pm.adc_bits_s) + pm.p_rf)
    return p_bs + p_ue + p_s


def energy_efficiency(report: MIReport | float, pcir: float) -> float:
    """Normalised EE: weighted objective divided by circuit power."""
    if not pcir > 0:
        raise ModelError("circuit power must be positive")
    obj = report.objective if isinstance(report, MIReport) else float(report)
    return obj / pcir
