"""Acceptance gate: ten end-to-end checks, one test (= one verdict line) each.

Run as ``pytest -v tests/test_acceptance.py``; every test prints a one-line
summary of what it measured.  Tolerances and instance counts are pinned here
on purpose — loosening them is a behavior change, not a cleanup.
"""

import json
import math
import time

import numpy as np
import pytest

import unispread as us
from unispread.cli import main as cli_main

from conftest import random_config, torus, free


def _rng(key):
    return np.random.Generator(np.random.Philox(key=key))


def test_01_oracle_equivalence_200_instances():
    rng = _rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for trial in range(210):
        d = 1 + trial % 3
        n = int(rng.integers(1, 8))
        w = torus(d) if rng.uniform() < 0.5 else free(d)
        src = random_config(rng, w, n)
        tgt = random_config(rng, w, n)
        got = us.bottleneck_distance(src, tgt).value
        oracle = us.brute_force_bottleneck(src, tgt)
        worst = max(worst, abs(got - oracle))
        assert abs(got - oracle) <= 1e-12
        count += 1
    elapsed = time.perf_counter() - t0
    assert count >= 200
    assert elapsed <= 10.0
    print(f"\ncriterion 1: {count} instances, max |solver-oracle| = {worst:.3e}, "
          f"elapsed {elapsed:.2f}s (cap 10s)")


def test_02_triangle_inequality_100_triples():
    rng = _rng(202)
    t0 = time.perf_counter()
    count = 0
    for trial in range(102):
        d = 1 + trial % 2
        w = torus(d)
        n = int(rng.integers(2, 9))
        if trial % 3 == 0:  # weighted triple with equal totals
            total = int(rng.integers(n, 2 * n + 1))
            def masses():
                cuts = sorted(rng.choice(range(1, total), size=n - 1, replace=False))
                parts = np.diff([0] + list(cuts) + [total])
                return tuple(int(x) for x in parts)
            cfgs = [random_config(rng, w, n, masses=masses()) for _ in range(3)]
        else:
            cfgs = [random_config(rng, w, n) for _ in range(3)]
        r12 = us.bottleneck_distance(cfgs[0], cfgs[1])
        r23 = us.bottleneck_distance(cfgs[1], cfgs[2])
        r13 = us.bottleneck_distance(cfgs[0], cfgs[2])
        assert r13.value <= r12.value + r23.value + 1e-9
        glued = us.compose(r12.witness, r23.witness)
        assert us.verify_marginals(glued).ok
        assert us.support_radius(glued).value <= r12.value + r23.value + 1e-9
        count += 1
    elapsed = time.perf_counter() - t0
    assert count >= 100
    assert elapsed <= 30.0
    print(f"\ncriterion 2: {count} triples, triangle + glued-plan radius verified, "
          f"elapsed {elapsed:.2f}s (cap 30s)")


def test_03_shift_bound_and_symmetry_100_pairs():
    rng = _rng(303)
    count = 0
    for trial in range(100):
        d = 1 + trial % 2
        w = torus(d)
        cfg = random_config(rng, w, int(rng.integers(2, 9)))
        z = tuple(rng.uniform(-12.0, 12.0, size=d))
        fwd = us.shift_distance(cfg, z).value
        bwd = us.shift_distance(cfg, tuple(-c for c in z)).value
        assert fwd <= us.vector_norm(z, w) + 1e-9
        assert abs(fwd - bwd) <= 1e-9
        count += 1
    print(f"\ncriterion 3: {count} (config, z) pairs satisfy the |z| bound and "
          f"-z symmetry")


@pytest.mark.parametrize("d", [1, 2])
def test_04_exact_lattice_certification(d):
    w = us.Window(d, (0.0,) * d, 8.0, us.TORUS)
    lat = us.make_lattice(1.0, w)
    res = us.lebesgue_distance(lat, s=1)
    assert res.value == 0.0
    assert res.error_bound == math.sqrt(d) / 2
    finer = us.lebesgue_distance(lat, s=2)
    assert finer.error_bound == res.error_bound / 2
    print(f"\ncriterion 4 (d={d}): lattice value 0, error {res.error_bound} at s=1, "
          f"{finer.error_bound} at s=2")


def test_05_perturbed_lattice_criterion():
    t0 = time.perf_counter()
    w = torus(1, 16.0)
    lines = []
    for eps in (0.05, 0.1, 0.2):
        cfg, _ = us.perturbed_lattice(w, 1.0, eps, seed=505)
        lat = us.lattice_displacement(cfg, 1.0)
        assert lat.value <= eps + 1e-9
        sweep = us.shift_sweep(cfg, preset=us.FINE)
        assert sweep.max_shift_distance <= 2 * eps + 0.5 + 1e-9
        leb = us.lebesgue_distance(cfg)
        assert leb.value + leb.error_bound <= eps + 0.5 + 1e-9
        lines.append(f"eps={eps}: lattice {lat.value:.4f} <= {eps}, "
                     f"sweep max {sweep.max_shift_distance:.4f} <= {2*eps + 0.5}, "
                     f"lebesgue upper {leb.value + leb.error_bound:.4f} <= {eps + 0.5}")
    elapsed = time.perf_counter() - t0
    assert elapsed <= 60.0
    print("\ncriterion 5: " + "; ".join(lines) + f"; elapsed {elapsed:.2f}s (cap 60s)")


def test_06_growth_detection_vs_consistency():
    defect = us.GeneratorSpec("density_defect", torus(1, 8.0))
    grew = us.growth_analysis(defect, (8.0, 16.0, 32.0), betas=1.5)
    assert all(a < b for a, b in zip(grew.values, grew.values[1:]))
    assert grew.ratio >= 1.5
    assert grew.classification == us.GROWTH_DETECTED

    spread = us.GeneratorSpec("perturbed", torus(1, 8.0), epsilon=0.2, seed=606)
    flat = us.growth_analysis(spread, (8.0, 16.0, 32.0), betas=1.0)
    assert flat.classification == us.SPREAD_CONSISTENT
    print(f"\ncriterion 6: density_defect values {grew.values} -> "
          f"{grew.classification}; perturbed values "
          f"{tuple(round(v, 4) for v in flat.values)} -> {flat.classification}")


def test_07_cesaro_averaging():
    cfg, _ = us.perturbed_lattice(torus(1, 8.0), 1.0, 0.1, seed=707)
    reports = {n: us.cesaro_average(cfg, n=n) for n in (1, 2, 3)}
    for n, rep in reports.items():
        assert rep.distance.value <= rep.max_shift_value + rep.distance.error_bound + 1e-9
        assert rep.bound_satisfied
        assert rep.marginals_verified
    assert reports[3].spread <= reports[1].spread
    print("\ncriterion 7: " + "; ".join(
        f"n={n}: dist {rep.distance.value:.4f} <= peak {rep.max_shift_value:.4f} "
        f"+ err {rep.distance.error_bound}, spread {rep.spread}"
        for n, rep in reports.items()))


def test_08_bijection_correspondence_50_pairs():
    rng = _rng(808)
    count = 0
    for trial in range(52):
        d = 1 + trial % 2
        w = torus(d)
        cfg = random_config(rng, w, int(rng.integers(2, 11)))
        z = tuple(rng.uniform(-4.0, 4.0, size=d))
        rep = us.shift_bijection(cfg, z)
        assert abs(rep.max_displacement - rep.distance.value) <= 1e-12
        n = len(cfg)
        assert sorted(p for p, _ in rep.pairing) == list(range(n))
        assert sorted(q for _, q in rep.pairing) == list(range(n))
        count += 1
    print(f"\ncriterion 8: {count} pairs, recomputed pairing displacement always "
          f"equals the shift distance")


def test_09_verify_chain_50_instances():
    count = 0
    worst_gap = -math.inf
    for seed in range(45):
        eps = 0.05 + 0.4 * (seed / 44.0)
        cfg, _ = us.perturbed_lattice(torus(1, 8.0), 1.0, eps, seed=seed)
        rep = us.verify_chain(cfg, 1.0)
        assert rep.constructive_ok
        worst_gap = max(worst_gap, rep.lebesgue.value - rep.bound)
        count += 1
    for seed in range(6):
        cfg, _ = us.perturbed_lattice(torus(2, 8.0), 1.0, 0.3, seed=seed)
        rep = us.verify_chain(cfg, 1.0)
        assert rep.constructive_ok
        worst_gap = max(worst_gap, rep.lebesgue.value - rep.bound)
        count += 1
    assert count >= 50
    print(f"\ncriterion 9: {count} instances, lebesgue <= lattice + alpha*sqrt(d)/2 "
          f"+ error everywhere (worst slack {-worst_gap:.4f})")


def test_10_cli_determinism(tmp_path):
    runs = {
        "growth": ("growth", "--kind", "density_defect", "--canonical", "--no-fig"),
        "lebesgue": ("lebesgue-dist", "--kind", "perturbed", "--epsilon", "0.2",
                     "--seed", "3", "--canonical", "--no-fig"),
        "cesaro": ("cesaro", "--kind", "perturbed", "--epsilon", "0.1",
                   "--seed", "7", "--n", "2", "--canonical", "--no-fig"),
    }
    for name, args in runs.items():
        a = tmp_path / f"{name}_a.json"
        b = tmp_path / f"{name}_b.json"
        assert cli_main(list(args) + ["--out", str(a)]) == 0
        assert cli_main(list(args) + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes(), f"{name}: reruns differ"
        json.loads(a.read_text())  # and they are valid JSON
    ga = (tmp_path / "growth_a.csv").read_bytes()
    gb = (tmp_path / "growth_b.csv").read_bytes()
    assert ga == gb
    pa, pb = tmp_path / "pa.txt", tmp_path / "pb.txt"
    gen = ("gen", "--kind", "poisson", "--intensity", "1.5", "--seed", "11")
    assert cli_main(list(gen) + ["--out", str(pa)]) == 0
    assert cli_main(list(gen) + ["--out", str(pb)]) == 0
    assert pa.read_bytes() == pb.read_bytes()
    print("\ncriterion 10: byte-identical canonical reruns for growth, "
          "lebesgue-dist, cesaro JSON (+CSV) and generated point files")
