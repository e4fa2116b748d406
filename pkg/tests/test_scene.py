import numpy as np
import pytest

from rfsel.errors import ModelError
from rfsel.scene import (
    GeometryConfig,
    build_scene,
    dump_scene,
    generate_scene,
    load_scene,
    scene_from_dict,
    scene_to_dict,
    steering_matrix,
    steering_tx,
    subselect_columns,
    subselect_covariance,
)
from rfsel.selection import SelectionSet


def test_steering_examples():
    np.testing.assert_allclose(steering_tx(0.0, 4), np.ones(4))
    np.testing.assert_allclose(steering_tx(np.pi / 2, 3), [1, -1, 1], atol=1e-15)
    np.testing.assert_allclose(steering_tx(np.pi / 6, 2), [1, -1j], atol=1e-15)


def test_steering_unit_modulus(rng):
    np.testing.assert_allclose(np.abs(steering_matrix(rng.uniform(-1, 1, 5), 9)), 1.0)


def test_single_path_all_ones():
    sc = build_scene(5, 3, [0.0], [0.0], [1.0], [0.3], [1.0], [[100.0]])
    np.testing.assert_allclose(sc.h_c, np.ones((3, 5)))


def test_single_target_no_pathloss():
    sc = build_scene(6, 2, [0.1], [0.2], [1.0], [0.4], [1.0], [[80.0]],
                     pathloss_exponent=0.0, reflection_powers=[2.5])
    assert sc.kappa[0, 0] == pytest.approx(2.5)
    t = steering_tx(0.4, 6)
    np.testing.assert_allclose(sc.r_t[0], 2.5 * np.outer(t, t.conj()), atol=1e-12)
    assert np.trace(sc.r_t[0]).real == pytest.approx(2.5 * 6)
    assert np.linalg.matrix_rank(sc.r_t[0]) == 1


def test_reconstruction_and_psd(rng):
    cfg = GeometryConfig(n_t=10, n_c=5, n_s=4, n_paths=6)
    sc = generate_scene(cfg, rng)
    want = sum(sc.a_c[l] * np.outer(steering_tx(sc.aoa_comm[l], 5), steering_tx(sc.aod_comm[l], 10).conj())
               for l in range(6))
    np.testing.assert_allclose(sc.h_c, want, atol=1e-12)
    for r in sc.r_t:
        w = np.linalg.eigvalsh(r)
        assert w[0] >= -1e-10 * w[-1]
        assert np.linalg.matrix_rank(r, tol=1e-9 * w[-1]) <= 4
        np.testing.assert_allclose(r, r.conj().T)


def test_covariance_formula(rng):
    sc = generate_scene(GeometryConfig(n_t=6, n_s=3, n_c=2, n_paths=2), rng)
    d = sc.distances
    rbar = d ** (-1.0) * np.exp(-2j * np.pi * d / 0.1)
    for n in range(3):
        want = sum(np.abs(rbar[n, i]) ** 2 * np.outer(steering_tx(sc.aod_sense[i], 6),
                                                      steering_tx(sc.aod_sense[i], 6).conj())
                   for i in range(3))
        np.testing.assert_allclose(sc.r_t[n], want, atol=1e-15)


def test_angles_in_sector(rng):
    sc = generate_scene(GeometryConfig(), rng)
    for a in (sc.aod_comm, sc.aoa_comm, sc.aod_sense):
        assert np.all(np.abs(a) <= np.pi / 3)


def test_determinism():
    a = generate_scene(GeometryConfig(), np.random.default_rng(5))
    b = generate_scene(GeometryConfig(), np.random.default_rng(5))
    np.testing.assert_array_equal(a.h_c, b.h_c)
    np.testing.assert_array_equal(a.r_t, b.r_t)


def test_path_gain_statistics():
    rng = np.random.default_rng(0)
    cfg = GeometryConfig(n_t=2, n_c=1, n_s=1, n_paths=1)
    g = [abs(generate_scene(cfg, rng).a_c[0]) ** 2 for _ in range(10_000)]
    assert np.mean(g) == pytest.approx(1.0, rel=0.05)


def test_geometry_validation():
    with pytest.raises(ModelError):
        GeometryConfig(n_t=0)
    with pytest.raises(ModelError):
        GeometryConfig(sector=(-2.0, 0.5))
    with pytest.raises(ModelError):
        GeometryConfig(pathloss_exponent=-1)


def test_subselect():
    m = np.array([[1, 2, 3], [4, 5, 6]])
    np.testing.assert_array_equal(subselect_columns(m, SelectionSet((1, 3), 3)), [[1, 3], [4, 6]])
    np.testing.assert_array_equal(subselect_columns(m, SelectionSet.full(3)), m)
    with pytest.raises(ModelError):
        subselect_columns(m, SelectionSet((1, 2), 4))


def test_subselect_covariance_is_sandwich(rng):
    sc = generate_scene(GeometryConfig(n_t=6, n_s=2, n_c=2, n_paths=2), rng)
    sel = SelectionSet((2, 4, 5), 6)
    s = sel.matrix()
    got = subselect_covariance(sc.r_t, sel)
    for n in range(2):
        np.testing.assert_allclose(got[n], s.T @ sc.r_t[n] @ s)


def test_json_round_trip(tmp_path, rng):
    sc = generate_scene(GeometryConfig(n_t=4, n_c=2, n_s=2, n_paths=3), rng)
    back = scene_from_dict(scene_to_dict(sc))
    np.testing.assert_array_equal(back.h_c, sc.h_c)
    dump_scene(sc, tmp_path / "s.json")
    again = load_scene(tmp_path / "s.json")
    np.testing.assert_array_equal(again.r_t, sc.r_t)
    np.testing.assert_array_equal(again.distances, sc.distances)
