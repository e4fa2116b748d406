import numpy as np
import pytest

from oracles import comm_bits, random_psd_stack, sense_bits
from rfsel.errors import ModelError
from rfsel.metrics import (
    LinkParams,
    MIReport,
    PowerModel,
    circuit_power,
    comm_mi,
    energy_efficiency,
    sensing_mi,
    weighted_objective,
)
from rfsel.scene import build_scene, subselect_covariance
from rfsel.selection import SelectionSet

from conftest import small_scene

# hand-built scene; reference values from the eigvalsh oracle at gamma=10, T=64
HAND = dict(n_t=6, n_c=3, aod_comm=[0.1, -0.4, 0.7], aoa_comm=[0.2, -0.3, 0.5],
            a_c=[1.0, 0.5 - 0.5j, -0.3j], aod_sense=[-0.6, 0.05, 0.45], a_s=[1, 1, 1],
            distances=[[60, 80, 100], [90, 70, 120], [150, 110, 55]])
HAND_IC = 1017.687665960171
HAND_IS = 5.723343437201247
HAND_OBJ = 8.904575463180711


def hand_scene():
    return build_scene(**HAND)


class TestLinkParams:
    def test_defaults(self):
        p = LinkParams(gamma=2.0)
        assert p.T == 64 and p.omega_s == 0.5

    def test_from_db(self):
        assert LinkParams.from_db(20).gamma == pytest.approx(100.0)

    @pytest.mark.parametrize("kw", [dict(gamma=0), dict(gamma=1, T=0), dict(gamma=1, omega_c=1.2),
                                    dict(gamma=1, omega_c=0.3, omega_s=0.3)])
    def test_invalid(self, kw):
        with pytest.raises(ModelError):
            LinkParams(**kw)


class TestMI:
    def test_zero_channel(self):
        assert comm_mi(np.zeros((3, 4)), LinkParams(1.0)) == 0.0

    def test_scalar(self):
        assert comm_mi(np.array([[2.0]]), LinkParams(1.0, T=1)) == pytest.approx(np.log2(5))

    def test_orientations_agree(self, rng):
        h = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
        p = LinkParams(3.0, T=1)
        assert comm_mi(h, p) == pytest.approx(comm_mi(h.T.conj(), p), abs=1e-9)
        assert comm_mi(h, p) == pytest.approx(comm_bits(h, 3.0, 1), abs=1e-9)

    def test_sensing_zero(self):
        assert sensing_mi(np.zeros((3, 4, 4)), LinkParams(5.0)) == 0.0

    def test_sensing_rank_one(self):
        t = np.exp(1j * np.arange(5) * 0.3)
        p = LinkParams(2.0, T=8)
        kappa = 0.7
        got = sensing_mi([kappa * np.outer(t, t.conj())], p)
        assert got == pytest.approx(np.log2(1 + 2.0 * 8 * kappa * 5))

    def test_sensing_matches_oracle(self, rng):
        r = random_psd_stack(rng, 3, 5, 2)
        assert sensing_mi(r, LinkParams(4.0, T=16)) == pytest.approx(sense_bits(r, 4.0, 16), rel=1e-10)

    def test_increasing_in_gamma(self):
        sc = small_scene(3)
        for lo, hi in ((0.5, 1.0), (1.0, 10.0)):
            assert comm_mi(sc.h_c, LinkParams(hi)) > comm_mi(sc.h_c, LinkParams(lo))
            assert sensing_mi(sc.r_t, LinkParams(hi)) > sensing_mi(sc.r_t, LinkParams(lo))


class TestObjective:
    def test_hand_scene_frozen(self):
        sc = hand_scene()
        full = SelectionSet.full
        rep = weighted_objective(sc, full(6), full(3), full(3), LinkParams(10.0))
        assert rep.comm_mi == pytest.approx(HAND_IC, rel=1e-10)
        assert rep.sensing_mi == pytest.approx(HAND_IS, rel=1e-10)
        assert rep.objective == pytest.approx(HAND_OBJ, rel=1e-10)

    def test_comm_only(self):
        sc = hand_scene()
        full = SelectionSet.full
        rep = weighted_objective(sc, full(6), full(3), full(3), LinkParams(10.0, omega_c=1.0))
        assert rep.objective == rep.comm_mi / 64

    def test_half_weights_average(self):
        sc = small_scene(4)
        full = SelectionSet.full
        rep = weighted_objective(sc, full(8), full(4), full(4), LinkParams(10.0))
        assert rep.objective == pytest.approx(0.5 * (rep.comm_mi / 64 + rep.sensing_mi / 4))

    def test_compositional_oracle(self):
        sc = small_scene(9)
        p = LinkParams.from_db(10)
        tx, rc, rs = SelectionSet((1, 4, 6), 8), SelectionSet((2, 3), 4), SelectionSet((1, 4), 4)
        rep = weighted_objective(sc, tx, rc, rs, p)
        h = sc.h_c[np.ix_(rc.zero_based, tx.zero_based)]
        r = subselect_covariance(sc.r_t[rs.zero_based], tx)
        ic, is_ = comm_bits(h, p.gamma, 64), sense_bits(r, p.gamma, 64)
        assert rep.comm_mi == pytest.approx(ic, rel=1e-10)
        assert rep.sensing_mi == pytest.approx(is_, rel=1e-10)
        # sensing normaliser stays at the full count of 4
        assert rep.objective == pytest.approx(0.5 * ic / 64 + 0.5 * is_ / 4, rel=1e-10)

    def test_empty_selection(self):
        sc = small_scene(1)
        with pytest.raises(ModelError):
            weighted_objective(sc, SelectionSet((), 8), SelectionSet.full(4), SelectionSet.full(4),
                               LinkParams(1.0))

    def test_subset_monotone(self):
        sc = small_scene(11)
        p = LinkParams.from_db(10)
        full_c, full_s = SelectionSet.full(4), SelectionSet.full(4)
        prev = None
        for k in range(1, 9):
            rep = weighted_objective(sc, SelectionSet(tuple(range(1, k + 1)), 8), full_c, full_s, p)
            if prev is not None:
                assert rep.comm_mi >= prev.comm_mi - 1e-9
                assert rep.sensing_mi >= prev.sensing_mi - 1e-9
            prev = rep


class TestPower:
    def test_empty_sets(self):
        pm = PowerModel()
        assert circuit_power(pm, 0, 0, 0) == pytest.approx(3 * pm.p_lo)

    def test_direct_substitution(self):
        # c * f_s * 2**b = 0.1 W for the DAC
        pm = PowerModel(p_lo=0.05, p_rf=0.2, f_s=1e8, dac_bits=10, c_dac=0.1 / (1e8 * 1024))
        assert pm.dac_power() == pytest.approx(0.1)
        assert circuit_power(pm, 1, 0, 0) == pytest.approx(0.45)

    def test_monotone_in_counts(self):
        pm = PowerModel()
        base = circuit_power(pm, 8, 6, 6)
        assert circuit_power(pm, 9, 6, 6) > base
        assert circuit_power(pm, 8, 7, 6) > base
        assert circuit_power(pm, 8, 6, 7) > base

    def test_accepts_selection_sets(self):
        pm = PowerModel()
        assert circuit_power(pm, SelectionSet.full(3), SelectionSet((1,), 2), 2) == \
            circuit_power(pm, 3, 1, 2)

    def test_monotone_in_bits(self):
        assert PowerModel(dac_bits=8).dac_power() < PowerModel(dac_bits=9).dac_power()
        assert PowerModel().adc_power(4) < PowerModel().adc_power(5)

    def test_invalid(self):
        with pytest.raises(ModelError):
            PowerModel(p_lo=0)

    def test_energy_efficiency(self):
        rep = MIReport(1.0, 2.0, 3.0)
        assert energy_efficiency(MIReport(0, 0, 0.0), 1.0) == 0.0
        assert energy_efficiency(rep, 2.0) == pytest.approx(energy_efficiency(rep, 1.0) / 2)
        with pytest.raises(ModelError):
            energy_efficiency(rep, 0.0)
