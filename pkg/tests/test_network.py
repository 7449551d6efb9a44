import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import qft2_with_flips, random_pair
from noisyeq.circuit import adjoint_circuit, gen_bv, gen_qft, random_circuit
from noisyeq.network import (
    Contractor,
    build_doubled_miter,
    build_trace_miter,
    circuit_to_network,
    contract,
    contraction_order,
    optimize,
)
from noisyeq.oracle import circuit_unitary, contract_dense
from noisyeq.tdd import Session


def trace_miter(ideal, noisy, choice):
    return build_trace_miter(ideal, circuit_to_network(noisy, choice))


@pytest.mark.parametrize("p", [0.5, 0.9, 0.95])
def test_trace_terms_of_qft2_with_flips(p):
    ideal, noisy = qft2_with_flips(p)
    values = {c: contract(trace_miter(ideal, noisy, c)) for c in [(0, 0), (0, 1), (1, 0), (1, 1)]}
    assert values[(0, 0)] == pytest.approx(4 * p, abs=1e-12)
    for c in [(0, 1), (1, 0), (1, 1)]:
        assert abs(values[c]) < 1e-12


@pytest.mark.parametrize("p", [0.5, 0.9, 0.999])
def test_doubled_miter_value(p):
    ideal, noisy = qft2_with_flips(p)
    assert contract(build_doubled_miter(ideal, noisy)) == pytest.approx(16 * p * p, abs=1e-9)
    assert contract(build_doubled_miter(ideal, ideal)) == pytest.approx(16, abs=1e-9)


def test_network_shapes():
    ideal, noisy = qft2_with_flips(0.9)
    net = circuit_to_network(noisy, [0, 1])
    assert len(net) == 6 and net.num_slots == 2 and not net.closed
    assert [t.slot for t in net.tensors if t.slot is not None] == [0, 1]
    assert len(net.inputs) == len(net.outputs) == 2
    miter = trace_miter(ideal, noisy, [0, 0])
    assert miter.closed and not miter.open_indices
    doubled = build_doubled_miter(ideal, noisy)
    assert doubled.closed and len(doubled) == 2 * ideal.gate_count + 2 * ideal.gate_count + 2
    with pytest.raises(ValueError):
        circuit_to_network(noisy, [0])
    with pytest.raises(ValueError):
        circuit_to_network(noisy, None)


def test_empty_circuit_trace_is_dimension():
    c = random_circuit(3, 0, seed=0)
    assert contract(trace_miter(c, c, [])) == pytest.approx(8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_matches_dense_contraction(seed):
    ideal, noisy = random_pair(seed, n_range=(1, 4), max_gates=10)
    choice = [int(np.random.default_rng(seed).integers(4)) % len(noisy.channel_of(i).kraus)
              for i in noisy.noises]
    net = trace_miter(ideal, noisy, choice)
    ref = np.trace(circuit_unitary(ideal).conj().T @ circuit_unitary(noisy, choice))
    assert contract(net) == pytest.approx(ref, abs=1e-10)
    assert contract_dense(net) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_value_independent_of_order(seed):
    ideal, noisy = random_pair(seed, n_range=(2, 3), max_gates=8, max_noises=2)
    net = build_doubled_miter(ideal, noisy)
    base = contract(net)
    rng = np.random.default_rng(seed)
    labels = net.labels
    for _ in range(3):
        order = [labels[i] for i in rng.permutation(len(labels))]
        assert Contractor(net, Session()).run(order=order) == pytest.approx(base, abs=1e-10)


def test_order_is_deterministic_and_complete():
    ideal, noisy = qft2_with_flips(0.9)
    net = build_doubled_miter(ideal, noisy)
    a, b = contraction_order(net), contraction_order(net)
    assert a == b
    assert sorted(a) == sorted(net.labels)


def test_two_tensor_order():
    c = random_circuit(1, 1, seed=1)
    net = trace_miter(c, c, [])
    assert len(net) == 2
    order = contraction_order(net)
    assert set(order) == set(net.labels)


@pytest.mark.parametrize("seed", range(20))
def test_optimize_preserves_value(seed):
    ideal, noisy = random_pair(seed, n_range=(1, 4), max_gates=12, max_noises=2)
    for net in (trace_miter(ideal, noisy, [0] * len(noisy.noises)), build_doubled_miter(ideal, noisy)):
        opt = optimize(net)
        assert len(opt) <= len(net)
        assert contract(opt) == pytest.approx(contract(net), abs=1e-10)


def test_optimize_qft2_miter():
    ideal, noisy = qft2_with_flips(0.9)
    net = trace_miter(ideal, noisy, [0, 0])
    opt = optimize(net)
    assert len(net) == 10 and len(opt) == 4
    assert sorted(t.name for t in opt.tensors if t.slot is None) == ["cs", "cs.dg"]
    assert abs(contract(opt) - contract(net)) < 1e-12


def test_optimize_full_cancellation():
    c = random_circuit(3, 10, seed=5)
    both = c + adjoint_circuit(c)
    net = build_trace_miter(random_circuit(3, 0), circuit_to_network(both))
    opt = optimize(net)
    assert len(opt) == 0
    assert contract(opt) == pytest.approx(8)


def test_optimize_switches():
    ideal, noisy = qft2_with_flips(0.9)
    net = trace_miter(ideal, noisy, [0, 0])
    assert len(optimize(net, swaps=False, cancel=False)) == len(net)
    assert len(optimize(net, swaps=True, cancel=False)) == len(net) - 2


@pytest.mark.parametrize("seed", range(10))
def test_ideal_trace_bounded_by_dimension(seed):
    c = random_circuit(3, 12, seed=seed)
    other = random_circuit(3, 12, seed=seed + 100)
    v = contract(trace_miter(other, c, []))
    assert abs(v) <= c.dim + 1e-10
    assert abs(contract(trace_miter(c, c, []))) == pytest.approx(c.dim)


def test_contractor_reuse_with_overrides():
    ideal, noisy = qft2_with_flips(0.8)
    ctr = Contractor(trace_miter(ideal, noisy, [0, 0]))
    chans = [noisy.channel_of(i) for i in noisy.noises]
    for choice in [(0, 0), (1, 0), (0, 1), (1, 1), (0, 0)]:
        overrides = {k: chans[k].kraus[j] for k, j in enumerate(choice)}
        assert ctr.run(overrides) == pytest.approx(contract(trace_miter(ideal, noisy, choice)), abs=1e-12)


def test_open_network_rejected():
    with pytest.raises(ValueError):
        Contractor(circuit_to_network(gen_bv(3)))


def test_larger_doubled_miter_completes():
    ideal = gen_qft(5)
    s = Session()
    v = Contractor(build_doubled_miter(ideal, ideal), s).run()
    assert v == pytest.approx(4 ** 5, rel=1e-9)
    assert 0 < s.peak_nodes < 10 ** 5
