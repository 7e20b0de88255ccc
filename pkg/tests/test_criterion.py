"""Spread diagnostics: shifts, lattices, Lebesgue targets, averaging, growth."""

import math
from fractions import Fraction

import pytest

import unispread as us
from conftest import assert_certified, config_of, free, random_config, torus


# ---------------------------------------------------------------------------
# shift_distance
# ---------------------------------------------------------------------------

def test_shift_distance_zero_vector():
    cfg = config_of(torus(), [0.3, 2.0, 5.5])
    res = us.shift_distance(cfg, (0.0,))
    assert res.value == 0.0
    assert_certified(res)


def test_shift_distance_half_step_lattice():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    res = us.shift_distance(lat, (0.5,))
    assert res.value == 0.5
    oracle = us.brute_force_bottleneck(lat, us.shift(lat, (0.5,)))
    assert res.value == oracle
    assert_certified(res)


def test_shift_distance_perturbed_integer_shift():
    w = torus(1, 8.0)
    eps = 0.2
    cfg, _ = us.perturbed_lattice(w, 1.0, eps, seed=3)
    res = us.shift_distance(cfg, (2.0,))
    # integer shifts permute the sites, so points move at most 2 eps
    assert res.value <= 2 * eps + 1e-12
    assert_certified(res)


def test_shift_distance_bounded_by_shift_length(rng):
    w = torus(2, 8.0)
    cfg = random_config(rng, w, 9)
    for _ in range(5):
        z = tuple(rng.uniform(-8.0, 8.0, size=2))
        res = us.shift_distance(cfg, z)
        assert res.value <= us.vector_norm(z, w) + 1e-9
        sym = us.shift_distance(cfg, tuple(-c for c in z))
        assert abs(res.value - sym.value) <= 1e-9


def test_shift_distance_rejects_free_window_and_bad_dim():
    cfg = config_of(free(), [0.0])
    with pytest.raises(us.ValidationError, match="torus"):
        us.shift_distance(cfg, (1.0,))
    with pytest.raises(us.ValidationError, match="dim"):
        us.shift_distance(config_of(torus(), [0.0]), (1.0, 2.0))


# ---------------------------------------------------------------------------
# shift_grid / shift_sweep
# ---------------------------------------------------------------------------

def test_shift_grid_presets():
    w = torus(1, 8.0)
    coarse, r_coarse = us.shift_grid(w)
    assert coarse == [(0.0,), (2.0,), (4.0,), (6.0,)]
    assert r_coarse == 1.0

    fine, r_fine = us.shift_grid(w, us.FINE)
    assert len(fine) == 32 and r_fine == 0.125
    assert {(float(i),) for i in range(8)} <= set(fine)  # integers included

    ints, r_int = us.shift_grid(w, us.INTEGERS)
    assert set(coarse) <= set(ints)
    assert {(float(i),) for i in range(5)} <= set(ints)
    assert r_int == 1.0

    w2 = torus(2, 2.0)
    fine2, r2 = us.shift_grid(w2, us.FINE)
    assert len(fine2) == 64
    assert r2 == pytest.approx(math.sqrt(2.0) / 8.0, abs=1e-15)

    with pytest.raises(us.ValidationError, match="preset"):
        us.shift_grid(w, "medium")


def test_shift_sweep_lattice_coarse_and_fine():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    coarse = us.shift_sweep(lat)
    # quarter-window shifts of L=8 are integers, so every sample is 0
    assert coarse.max_shift_distance == 0.0
    assert coarse.covering_radius == 1.0
    assert coarse.certified_sup_bound == 1.0

    fine = us.shift_sweep(lat, preset=us.FINE)
    assert fine.max_shift_distance == 0.5  # attained at half-integer shifts
    assert fine.certified_sup_bound == 0.625
    # the true sup over all shifts (0.5) is inside the certified bound
    assert fine.max_shift_distance <= 0.5 <= fine.certified_sup_bound


def test_shift_sweep_explicit_shifts_against_brute_force():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    shifts = [(0.0,), (0.25,), (0.5,)]
    rep = us.shift_sweep(lat, shifts=shifts)
    assert rep.covering_radius is None and rep.certified_sup_bound is None
    for z, res in zip(rep.shifts, rep.results):
        assert res.value == us.brute_force_bottleneck(lat, us.shift(lat, z))
        assert_certified(res)
    assert rep.max_shift_distance == 0.5
    assert rep.shifts == ((0.0,), (0.25,), (0.5,))


def test_shift_sweep_is_empirically_lipschitz(rng):
    cfg = random_config(rng, torus(1, 4.0), 4)
    rep = us.shift_sweep(cfg, preset=us.FINE)
    vals = [r.value for r in rep.results]
    for (z1, v1), (z2, v2) in zip(zip(rep.shifts, vals), zip(rep.shifts[1:], vals[1:])):
        assert abs(v2 - v1) <= abs(z2[0] - z1[0]) + 1e-9


def test_shift_sweep_rejects_empty_list():
    with pytest.raises(us.ValidationError, match="empty"):
        us.shift_sweep(config_of(torus(), [0.0]), shifts=[])


def test_shift_sweep_report_to_dict():
    rep = us.shift_sweep(us.make_lattice(2.0, torus(1, 8.0)))
    data = rep.to_dict()
    assert data["schema_version"] == us.SCHEMA_VERSION
    assert data["shifts"] == [[0.0], [2.0], [4.0], [6.0]]
    assert data["certified_sup_bound"] == data["max_shift_distance"] + data["covering_radius"]


# ---------------------------------------------------------------------------
# lattice_displacement / lebesgue_distance / verify_chain
# ---------------------------------------------------------------------------

def test_lattice_displacement_exact_lattice():
    lat = us.make_lattice(1.0, torus(2, 4.0))
    res = us.lattice_displacement(lat, 1.0)
    assert res.value == 0.0
    assert_certified(res)


def test_lattice_displacement_perturbed():
    eps = 0.3
    cfg, _ = us.perturbed_lattice(torus(1, 16.0), 1.0, eps, seed=1)
    res = us.lattice_displacement(cfg, 1.0)
    assert res.value <= eps + 1e-12
    assert_certified(res)


def test_lattice_displacement_count_mismatch():
    cfg = us.density_defect(torus(1, 8.0))  # 12 points vs 8 sites
    with pytest.raises(us.CountMismatchError) as err:
        us.lattice_displacement(cfg, 1.0)
    assert err.value.source_count == 12
    assert err.value.target_count == 8
    assert "12" in str(err.value) and "8" in str(err.value)


def test_lattice_displacement_requires_torus():
    with pytest.raises(us.ValidationError, match="torus"):
        us.lattice_displacement(config_of(free(), [0.0]), 1.0)


@pytest.mark.parametrize("d", [1, 2])
def test_lebesgue_distance_lattice(d):
    w = us.Window(d, (0.0,) * d, 8.0, us.TORUS)
    lat = us.make_lattice(1.0, w)
    res = us.lebesgue_distance(lat)
    assert res.value == 0.0
    assert res.error_bound == pytest.approx(math.sqrt(d) / 2, abs=1e-15)
    finer = us.lebesgue_distance(lat, s=2)
    assert finer.error_bound == pytest.approx(math.sqrt(d) / 4, abs=1e-15)


def test_lebesgue_distance_beta_validation():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    ok = us.lebesgue_distance(lat, beta=1.0)
    assert ok.value == 0.0
    with pytest.raises(us.ValidationError, match="does not match total mass"):
        us.lebesgue_distance(lat, beta=2.0)
    with pytest.raises(us.ValidationError, match="nonempty"):
        us.lebesgue_distance(us.PointConfiguration(torus(), ()))
    with pytest.raises(us.ValidationError, match="torus"):
        us.lebesgue_distance(config_of(free(), [0.0]))


def test_lebesgue_distance_fractional_density():
    # density 3/2: 12 points on L=8 against cell mass 3/2 per unit cell
    cfg = us.density_defect(torus(1, 8.0))
    res = us.lebesgue_distance(cfg, beta=1.5)
    assert res.witness.target.total_mass() == 12
    assert res.value == 1.0  # the defect forces mass across the density step
    assert_certified(res)


def test_verify_chain_lattice():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    rep = us.verify_chain(lat, 1.0)
    assert rep.lattice.value == 0.0
    assert rep.lebesgue.value == 0.0
    assert rep.bound == 1.0  # 0 + 1*sqrt(1)/2 + 0.5
    assert rep.constructive_ok
    data = rep.to_dict()
    assert data["schema_version"] == us.SCHEMA_VERSION
    assert data["constructive_ok"] is True


def test_verify_chain_alpha_two():
    lat = us.make_lattice(2.0, torus(1, 8.0))
    rep = us.verify_chain(lat, 2.0)
    assert rep.lattice.value == 0.0 and rep.lebesgue.value == 0.0
    assert rep.bound == 2.0  # 0 + 2*0.5 + error 1.0
    assert rep.constructive_ok


def test_verify_chain_perturbed_sweep():
    for seed in range(10):
        cfg, _ = us.perturbed_lattice(torus(1, 8.0), 1.0, 0.25, seed=seed)
        rep = us.verify_chain(cfg, 1.0)
        assert rep.constructive_ok
        assert rep.lebesgue.value <= rep.bound + 1e-9


# ---------------------------------------------------------------------------
# cesaro_average
# ---------------------------------------------------------------------------

def test_cesaro_lattice_is_already_flat():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    rep = us.cesaro_average(lat, n=1)
    assert rep.shifts == ((-1,), (0,), (1,))
    assert rep.shift_values == (0.0, 0.0, 0.0)
    assert rep.spread == 0.0
    assert rep.cell_masses == (3,) * 8
    assert rep.cell_quantum == Fraction(1, 3)
    assert rep.distance.value == 0.0
    assert rep.bound_satisfied and rep.marginals_verified


def test_cesaro_perturbed_spread_and_bounds():
    cfg, _ = us.perturbed_lattice(torus(1, 8.0), 1.0, 0.1, seed=5)
    reports = {n: us.cesaro_average(cfg, n=n) for n in (1, 3)}
    for n, rep in reports.items():
        assert rep.marginals_verified
        assert rep.bound_satisfied
        assert rep.distance.value <= rep.max_shift_value + rep.distance.error_bound + 1e-9
    assert reports[3].spread <= reports[1].spread


def test_cesaro_single_shift_box():
    cfg = config_of(torus(1, 4.0), [0.5, 1.25, 2.0, 3.75])
    rep = us.cesaro_average(cfg, k=(2,), n=0)
    assert rep.shifts == ((2,),)
    assert rep.k == (2,) and rep.n == 0
    assert rep.marginals_verified
    data = rep.to_dict()
    assert data["schema_version"] == us.SCHEMA_VERSION
    assert data["cell_quantum_den"] >= 1


def test_cesaro_validation():
    cfg = config_of(torus(), [0.0])
    with pytest.raises(us.ValidationError, match=">= 0"):
        us.cesaro_average(cfg, n=-1)
    with pytest.raises(us.ValidationError, match="coordinates"):
        us.cesaro_average(cfg, k=(0, 0))
    with pytest.raises(us.ValidationError, match="torus"):
        us.cesaro_average(config_of(free(), [0.0]))


# ---------------------------------------------------------------------------
# shift_bijection
# ---------------------------------------------------------------------------

def test_bijection_identity_shift():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    rep = us.shift_bijection(lat, (0.0,))
    assert rep.pairing == tuple((n, n) for n in range(8))
    assert rep.max_displacement == 0.0 == rep.distance.value


def test_bijection_unit_shift_rotates_indices():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    rep = us.shift_bijection(lat, (1.0,))
    assert rep.pairing == tuple((n, (n + 1) % 8) for n in range(8))
    assert rep.max_displacement == 0.0
    assert rep.distance.value == 0.0


def test_bijection_half_shift():
    lat = us.make_lattice(1.0, torus(1, 8.0))
    rep = us.shift_bijection(lat, (0.5,))
    assert rep.max_displacement == rep.distance.value == 0.5
    assert sorted(p for p, _ in rep.pairing) == list(range(8))
    assert sorted(q for _, q in rep.pairing) == list(range(8))


def test_bijection_random_configs_match_distance(rng):
    w = torus(2, 8.0)
    for _ in range(5):
        cfg = random_config(rng, w, 7)
        z = tuple(rng.uniform(-2.0, 2.0, size=2))
        rep = us.shift_bijection(cfg, z)
        assert rep.max_displacement == rep.distance.value
        assert_certified(rep.distance)


def test_bijection_requires_unit_masses():
    cfg = config_of(torus(), [0.0], masses=(2,))
    with pytest.raises(us.ValidationError, match="unit masses"):
        us.shift_bijection(cfg, (1.0,))


def test_bijection_report_to_dict():
    lat = us.make_lattice(2.0, torus(1, 8.0))
    rep = us.shift_bijection(lat, (2.0,))
    data = rep.to_dict()
    assert data["schema_version"] == us.SCHEMA_VERSION
    assert data["z"] == [2.0]
    assert len(data["pairing"]) == 4


# ---------------------------------------------------------------------------
# growth_analysis
# ---------------------------------------------------------------------------

def test_growth_density_defect_lebesgue_route():
    fam = us.GeneratorSpec("density_defect", torus(1, 8.0))
    rep = us.growth_analysis(fam, (8.0, 16.0, 32.0), betas=1.5)
    assert rep.values == (1.0, 2.0, 3.0)
    assert rep.error_bounds == (0.5, 0.5, 0.5)
    assert rep.slope > 0.05 and rep.ratio >= 1.5
    assert rep.classification == us.GROWTH_DETECTED


def test_growth_density_defect_sweep_route():
    fam = us.GeneratorSpec("density_defect", torus(1, 8.0))
    rep = us.growth_analysis(fam, (8.0, 16.0, 32.0), route="sweep")
    assert rep.values == (1.0, 2.0, 4.0)
    assert rep.error_bounds == (0.0, 0.0, 0.0)
    assert rep.classification == us.GROWTH_DETECTED


def test_growth_perturbed_is_spread_consistent():
    fam = us.GeneratorSpec("perturbed", torus(1, 8.0), epsilon=0.25, seed=2)
    rep = us.growth_analysis(fam, (8.0, 16.0, 32.0), betas=1.0)
    assert rep.classification == us.SPREAD_CONSISTENT
    assert max(rep.values) <= 0.25 + 1e-9


def test_growth_lattice_sweep_ratio_with_zero_baseline():
    fam = us.GeneratorSpec("lattice", torus(1, 8.0))
    rep = us.growth_analysis(fam, (8.0, 16.0, 32.0), route="sweep")
    assert rep.values == (0.0, 0.0, 0.0)
    assert rep.slope == 0.0 and rep.ratio == 1.0
    assert rep.classification == us.SPREAD_CONSISTENT


def test_growth_validation():
    fam = us.GeneratorSpec("lattice", torus(1, 8.0))
    with pytest.raises(us.ValidationError, match="at least 3"):
        us.growth_analysis(fam, (8.0, 16.0))
    with pytest.raises(us.ValidationError, match="increasing"):
        us.growth_analysis(fam, (8.0, 16.0, 16.0))
    with pytest.raises(us.ValidationError, match="betas"):
        us.growth_analysis(fam, (8.0, 16.0, 32.0), betas=[1.0, 1.0])
    with pytest.raises(us.ValidationError, match="route"):
        us.growth_analysis(fam, (8.0, 16.0, 32.0), route="walk")


def test_growth_report_serialization(tmp_path):
    fam = us.GeneratorSpec("density_defect", torus(1, 8.0))
    rep = us.growth_analysis(fam, (8.0, 16.0, 32.0), betas=1.5)
    data = rep.to_dict()
    assert data["schema_version"] == us.SCHEMA_VERSION
    assert data["entries"][0] == {"L": 8.0, "value": 1.0, "error_bound": 0.5}
    path = tmp_path / "growth.csv"
    us.write_growth_csv(rep, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "L,value,error_bound"
    assert lines[1] == "8,1,0.5"
    assert lines[3] == "32,3,0.5"
