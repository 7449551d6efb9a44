"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import qft2_with_flips, random_pair
from noisyeq.circuit import gen_bv, gen_qft, insert_noise, random_circuit, random_noise_spec
from noisyeq.cli import bench_circuit
from noisyeq.fidelity import (
    average_fidelity,
    cj_metric,
    fidelity_collective,
    fidelity_individual,
)
from noisyeq.network import build_trace_miter, circuit_to_network, contract, optimize
from noisyeq.oracle import haar_average_fidelity, jamiolkowski_fidelity_dense


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def best_time(fn, repeats: int) -> float:
    return min(fn() for _ in range(repeats))


def test_criterion_01_closed_form_anchor(verdict):
    t0 = time.perf_counter()
    worst = worst_scalar = 0.0
    for p in (0.5, 0.95, 0.999):
        ideal, noisy = qft2_with_flips(p)
        ind = fidelity_individual(ideal, noisy)
        col = fidelity_collective(ideal, noisy)
        worst = max(worst, abs(ind.fj - p * p), abs(col.fj - p * p))
        worst_scalar = max(worst_scalar, abs(col.scalar - 16 * p * p))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and worst_scalar < 1e-9 and elapsed < 1.0
    verdict(1, ok, f"max |fj - p^2| = {worst:.2e}, max |scalar - 16p^2| = {worst_scalar:.2e}, "
                   f"{elapsed:.3f} s")


def test_criterion_02_early_exit_anchor(verdict):
    ideal, noisy = qft2_with_flips(0.95)
    r = fidelity_individual(ideal, noisy, early_exit=0.1)
    ok = (r.equivalent == "yes-by-bound" and r.terms_evaluated == 1 and r.total_terms == 4
          and abs(r.fj - 0.9025) <= 1e-12)
    verdict(2, ok, f"{r.equivalent} after {r.terms_evaluated}/{r.total_terms} terms, bound {r.fj!r}")


def test_criterion_03_cross_oracle_differential(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    shapes = set()
    for seed in range(50):
        ideal, noisy = random_pair(1000 + seed, n_range=(2, 5), max_gates=20, max_noises=3,
                                   channel="depolarizing", p=0.999)
        shapes.add((ideal.num_qubits, len(noisy.noises)))
        ref = jamiolkowski_fidelity_dense(ideal, noisy)
        fi = fidelity_individual(ideal, noisy).raw_fj
        fc = fidelity_collective(ideal, noisy).raw_fj
        worst = max(worst, abs(fi - ref), abs(fc - ref), abs(fi - fc))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 300
    verdict(3, ok, f"50 circuits ({len(shapes)} qubit/noise shapes), max deviation {worst:.2e}, "
                   f"{elapsed:.1f} s")


def test_criterion_04_self_fidelity(verdict):
    worst = 0.0
    for n in range(1, 9):
        for c in (gen_qft(n), gen_bv(n), gen_bv(n, flip_ancilla=True)):
            worst = max(worst, abs(fidelity_collective(c, c).raw_fj - 1))
    verdict(4, worst < 1e-10, f"qft/bv n=1..8, max |fj - 1| = {worst:.2e}")


def test_criterion_05_stability_and_chaining(verdict):
    stab = 0.0
    slack = -math.inf
    for seed in range(50):
        rng = np.random.default_rng(2000 + seed)
        parts = []
        for _ in range(2):
            u = random_circuit(2, int(rng.integers(1, 9)), seed=rng)
            spec = random_noise_spec(u, int(rng.integers(1, 3)), "depolarizing",
                                     float(rng.uniform(0.6, 1.0)), seed=rng)
            parts.append((u, insert_noise(u, spec)))
        (u1, e1), (u2, e2) = parts
        f1, f2 = (jamiolkowski_fidelity_dense(u, e) for u, e in parts)
        f12 = jamiolkowski_fidelity_dense(u1 + u2, e1 + e2)
        # the library agrees with the oracle on the composition
        assert abs(fidelity_collective(u1 + u2, e1 + e2).raw_fj - f12) < 1e-9
        slack = max(slack, cj_metric(f12) - cj_metric(f1) - cj_metric(f2))
        if seed < 10:
            wide = fidelity_collective(u1.with_qubits(3), e1.with_qubits(3)).raw_fj
            stab = max(stab, abs(wide - f1), abs(jamiolkowski_fidelity_dense(
                u1.with_qubits(3), e1.with_qubits(3)) - f1))
    ok = stab < 1e-10 and slack <= 1e-9
    verdict(5, ok, f"stability max deviation {stab:.2e}; chaining max excess {slack:.2e} (<= 1e-9)")


def test_criterion_06_average_fidelity_identity(verdict):
    zs = []
    for seed in range(5):
        rng = np.random.default_rng(3000 + seed)
        n = int(rng.integers(2, 4))
        u = random_circuit(n, 8, seed=rng)
        noisy = insert_noise(u, random_noise_spec(u, 2, "depolarizing", 0.8, seed=rng))
        fj = fidelity_collective(u, noisy).fj
        mean, err = haar_average_fidelity(u, noisy, samples=10_000, seed=seed)
        zs.append(abs(mean - average_fidelity(fj, u.dim)) / err)
    ok = max(zs) < 3
    verdict(6, ok, "deviations in standard errors: " + ", ".join(f"{z:.2f}" for z in zs))


def test_criterion_07_computed_table_reuse(verdict):
    base = bench_circuit("bv", 4)
    noisy = insert_noise(base, random_noise_spec(base, 6, "bit_flip", 0.999, seed=0))
    shared = fidelity_individual(base, noisy, shared_table=True)
    cold = fidelity_individual(base, noisy, shared_table=False)
    t_shared = best_time(lambda: fidelity_individual(base, noisy, keep_traces=False).wall_time, 5)
    t_cold = best_time(
        lambda: fidelity_individual(base, noisy, keep_traces=False, shared_table=False).wall_time, 5)
    saving = 1 - t_shared / t_cold
    ok = saving >= 0.30 and abs(shared.fj - cold.fj) <= 1e-12
    verdict(7, ok, f"{noisy.total_terms()} terms: shared {t_shared:.4f} s vs cold {t_cold:.4f} s "
                   f"({100 * saving:.0f}% saved), |dfj| = {abs(shared.fj - cold.fj):.1e}")


def test_criterion_08_scalability_smoke(verdict):
    bv = bench_circuit("bv", 16)
    bv_noisy = insert_noise(bv, random_noise_spec(bv, 9, "depolarizing", 0.999, seed=0))
    qft = gen_qft(7)
    qft_noisy = insert_noise(qft, random_noise_spec(qft, 6, "depolarizing", 0.999, seed=0))
    rb = fidelity_collective(bv, bv_noisy)
    rq = fidelity_collective(qft, qft_noisy)
    ok = rb.wall_time < 120 and rq.wall_time < 600 and 0 < rb.fj <= 1 and 0 < rq.fj <= 1
    verdict(8, ok, f"bv16+9: {rb.wall_time:.2f} s ({rb.peak_nodes} nodes, fj {rb.fj:.6f}); "
                   f"qft7+6: {rq.wall_time:.2f} s ({rq.peak_nodes} nodes, fj {rq.fj:.6f})")


def test_criterion_09_optimization_soundness(verdict):
    ideal, noisy = qft2_with_flips(0.9)
    net = build_trace_miter(ideal, circuit_to_network(noisy, [0, 0]))
    opt = optimize(net)
    a, b = contract(net), contract(opt)
    names = sorted(t.name for t in opt.tensors)
    ok = abs(a - b) < 1e-12 and len(opt) < len(net) and not any(n in ("h", "swap") for n in names)
    verdict(9, ok, f"value {a.real:.6f} vs {b.real:.6f}; tensors {len(net)} -> {len(opt)} {names}")


def test_criterion_10_algorithm_crossover_trend(verdict):
    base = bench_circuit("bv", 4)
    ratios = []
    for k in range(1, 7):
        noisy = insert_noise(base, random_noise_spec(base, k, "depolarizing", 0.999, seed=0))
        reps = 9 if k <= 3 else 3
        t1 = best_time(lambda: fidelity_individual(base, noisy, keep_traces=False).wall_time, reps)
        t2 = best_time(lambda: fidelity_collective(base, noisy).wall_time, reps)
        ratios.append(math.log(t1 / t2))
    ok = all(b >= a for a, b in zip(ratios, ratios[1:]))
    verdict(10, ok, "log(t_ind/t_col) for 1..6 noises: " + ", ".join(f"{r:.2f}" for r in ratios))
