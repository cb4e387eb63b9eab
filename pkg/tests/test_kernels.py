import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import random_state
from qstack.compiler import Topology
from qstack.errors import FitFailedError, NoMatchKnownError, NotPowerOfTwoError
from qstack.kernels import (
    AlignmentQuery,
    RbConfig,
    ReferenceIndex,
    diffusion,
    grover_align,
    grover_build,
    optimal_iterations,
    phase_oracle,
    random_reference,
    run_rb,
    success_probability,
)
from qstack.kernels import clifford
from qstack.kernels.alignment import hamming, mark
from qstack.kernels.rb import fit_decay, predicted_decay, random_sequence, sequence_circuit
from qstack.simulator import PERFECT, NoiseModel, QuantumState, apply_gate, gate_matrix, run, statevector


def apply_bundles(psi, n, bundles):
    s = QuantumState.from_amplitudes(psi)
    for b in bundles:
        for g in b.gates:
            s = apply_gate(s, g)
    return s.amplitudes


# ---------------------------------------------------------------- Grover


def test_optimal_iterations():
    assert optimal_iterations(8, 1) == 2
    assert optimal_iterations(4, 1) == 1
    assert optimal_iterations(64, None) == 6
    assert optimal_iterations(4, 4) == 0
    with pytest.raises(ValueError):
        optimal_iterations(8, 0)


def test_k1_single_iteration_follows_closed_form():
    # N=2, M=1: theta = pi/4, so one iteration gives sin^2(3*pi/4) = 1/2
    probs = statevector(grover_build(1, [1], iterations=1, measure=False)).probabilities()
    assert math.isclose(success_probability(2, 1, 1), 0.5, abs_tol=1e-12)
    assert abs(probs[1] - 0.5) < 1e-12


def test_k2_exact_case():
    probs = statevector(grover_build(2, [3], iterations=1, measure=False)).probabilities()
    assert abs(probs[3] - 1.0) < 1e-12
    assert run(grover_build(2, [3], 1), PERFECT, 1000, seed=3).histogram == {"11": 1000}


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_phase_oracle_flips_exactly_marked(k):
    rng = np.random.default_rng(k)
    marked = sorted(set(int(m) for m in rng.integers(0, 1 << k, size=3)))
    oracle = phase_oracle(k, marked)
    for b in range(1 << k):
        psi = np.zeros(1 << k, dtype=complex)
        psi[b] = 1
        out = apply_bundles(psi, k, oracle)
        sign = -1 if b in marked else 1
        assert np.allclose(out, sign * psi, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_diffusion_is_an_involution(k):
    rng = np.random.default_rng(10 + k)
    for _ in range(5):
        psi = random_state(rng, k)
        out = apply_bundles(apply_bundles(psi, k, diffusion(k)), k, diffusion(k))
        assert np.max(np.abs(out - psi)) < 1e-10


def test_oracle_rejects_out_of_range():
    with pytest.raises(ValueError):
        phase_oracle(2, [4])


@settings(max_examples=20)
@given(st.integers(1, 6), st.data())
def test_grover_matches_closed_form(k, data):
    n_items = 1 << k
    marked = data.draw(st.sets(st.integers(0, n_items - 1), min_size=1, max_size=max(1, n_items // 2)))
    r = data.draw(st.integers(0, 4))
    probs = statevector(grover_build(k, marked, r, measure=False)).probabilities()
    expected = success_probability(n_items, len(marked), r)
    assert abs(sum(probs[m] for m in marked) - expected) < 1e-10


def test_grover_sampled_within_three_sigma():
    shots = 4000
    for k, marked, r in [(3, [5], 2), (4, [1, 9], 2), (5, [0, 7, 30], 3), (6, [42], 6)]:
        summary = run(grover_build(k, marked, r), PERFECT, shots, seed=k)
        hit = sum(summary.histogram.get(format(m, f"0{k}b"), 0) for m in marked) / shots
        p = success_probability(1 << k, len(marked), r)
        assert abs(hit - p) <= 3 * math.sqrt(p * (1 - p) / shots) + 1e-9


# ---------------------------------------------------------------- alignment


def test_reference_index_slices_and_padding():
    ref = "ACGTACGTAACCGGTT" + "ACG"
    idx = ReferenceIndex.build(ref, 4)
    assert idx.slices[:4] == ["ACGT", "ACGT", "AACC", "GGTT"]
    assert idx.size == 4
    idx5 = ReferenceIndex.build("A" * 20, 4)
    assert idx5.size == 8 and idx5.slices[5:] == [None] * 3
    assert ReferenceIndex.build("ACGT", 4).size == 2


def test_padding_never_matches():
    idx = ReferenceIndex.build("AAAA" * 5, 4)
    assert mark(idx, AlignmentQuery("TTTT", max_mismatch=4)) == [0, 1, 2, 3, 4]


def test_reference_validation():
    with pytest.raises(ValueError):
        ReferenceIndex.build("ACGX", 2)
    with pytest.raises(ValueError):
        ReferenceIndex.build("AC", 4)
    with pytest.raises(ValueError):
        AlignmentQuery("ACGT", -1)
    with pytest.raises(ValueError):
        mark(ReferenceIndex.build("ACGTACGT", 4), AlignmentQuery("ACG"))


def test_hamming():
    assert hamming("ACGT", "ACGA") == 1
    assert hamming("ACGT", "ACGT") == 0


def test_random_reference_seeded():
    a = random_reference(100, 5)
    assert a == random_reference(100, 5) and set(a) <= set("ACGT") and len(a) == 100


def eight_slice_index(seed=0):
    ref = random_reference(64, seed)
    return ref, ReferenceIndex.build(ref, 8)


def test_exact_match_n8():
    ref, idx = eight_slice_index()
    query = AlignmentQuery(ref[24:32])
    assert mark(idx, query) == [3]
    result = grover_align(idx, query, PERFECT, 20_000, seed=1)
    assert result.top() == 3 and result.iterations == 2
    assert abs(result.ranking[0]["frequency"] - 0.9453) < 0.015
    assert result.ranking[0]["slice"] == ref[24:32]


def test_all_match_uniform():
    idx = ReferenceIndex.build("ACGT" * 4, 4)
    result = grover_align(idx, AlignmentQuery("ACGT"), PERFECT, 20_000, seed=2)
    assert result.marked == [0, 1, 2, 3] and result.iterations == 0
    for entry in result.ranking:
        assert abs(entry["frequency"] - 0.25) < 0.02


def test_mismatch_tolerance_marks_near_matches():
    ref, idx = eight_slice_index(1)
    read = list(ref[0:8])
    read[2] = "A" if read[2] != "A" else "C"
    query = AlignmentQuery("".join(read), max_mismatch=1)
    assert 0 in mark(idx, query)
    assert grover_align(idx, query, PERFECT, 4000, seed=0).top() in mark(idx, query)


def test_noise_lowers_top_frequency_paired_seeds():
    ref, idx = eight_slice_index()
    query = AlignmentQuery(ref[24:32])
    noisy = NoiseModel.depolarizing(0.01)
    lower = 0
    for seed in range(20):
        clean = grover_align(idx, query, PERFECT, 2000, seed).ranking[0]["frequency"]
        dirty = {e["index"]: e["frequency"] for e in grover_align(idx, query, noisy, 2000, seed).ranking}
        lower += dirty.get(3, 0.0) < clean
    assert lower == 20


def test_no_match_exact_raises_and_unknown_runs():
    idx = ReferenceIndex.build("A" * 32, 4)
    with pytest.raises(NoMatchKnownError):
        grover_align(idx, AlignmentQuery("CCCC"), PERFECT, 100, 0)
    result = grover_align(idx, AlignmentQuery("CCCC"), PERFECT, 100, 0, iterations="unknown")
    assert result.marked == [] and result.expected_success is None
    assert sum(e["count"] for e in result.ranking) == 100


def test_not_power_of_two():
    idx = ReferenceIndex("ACGTACGTACGT", 4, ["ACGT"] * 3)
    with pytest.raises(NotPowerOfTwoError):
        grover_align(idx, AlignmentQuery("ACGT"), PERFECT, 10, 0)


def test_alignment_deterministic_and_compiled_path():
    ref, idx = eight_slice_index(4)
    query = AlignmentQuery(ref[40:48])
    noisy = NoiseModel.depolarizing(0.002)
    assert grover_align(idx, query, noisy, 500, 9).to_dict() == grover_align(idx, query, noisy, 500, 9).to_dict()
    compiled = grover_align(idx, query, PERFECT, 4000, 1, topology=Topology.grid(2, 2))
    assert compiled.top() == 5
    assert abs(compiled.ranking[0]["frequency"] - 0.9453) < 0.03


# ---------------------------------------------------------------- Clifford group and RB


def test_clifford_group_tables():
    assert clifford.SIZE == 24 and clifford.WORDS[0] == ()
    for a in range(24):
        assert clifford.COMPOSE[a][clifford.INVERSE[a]] == 0
        assert clifford.COMPOSE[0][a] == a == clifford.COMPOSE[a][0]
        for b in range(24):
            u = clifford.UNITARIES[b] @ clifford.UNITARIES[a]
            v = clifford.UNITARIES[clifford.COMPOSE[a][b]]
            assert abs(abs(np.vdot(u.reshape(-1), v.reshape(-1))) - 2) < 1e-9


def test_word_gates_realize_unitaries():
    for e in range(24):
        s = np.eye(2, dtype=complex)
        for g in clifford.word_gates(e):
            s = gate_matrix(g) @ s
        assert abs(abs(np.vdot(s.reshape(-1), clifford.UNITARIES[e].reshape(-1))) - 2) < 1e-9


def test_rb_sequences_invert_exactly():
    rng = np.random.default_rng(0)
    for length in (1, 2, 5, 17, 64):
        for _ in range(10):
            seq = random_sequence(length, rng)
            c = sequence_circuit(seq)
            probs = statevector(c, skip_measurements=True).probabilities()
            assert abs(probs[0] - 1) < 1e-12


def test_predicted_decay():
    assert predicted_decay(0.0) == 1.0
    assert 0 < predicted_decay(0.01) < 1
    assert math.isclose(predicted_decay(0.01), np.mean([(1 - 0.04 / 3) ** len(w) for w in clifford.WORDS]))


def test_rb_noiseless():
    result = run_rb(RbConfig((1, 4, 16, 64), 5, 0.0, 50), seed=0)
    assert all(s == 1.0 for s in result.survival_mean)
    assert abs(result.decay - 1.0) < 1e-3


def test_rb_noisy_decays():
    result = run_rb(RbConfig((2, 8, 32, 128), 10, 0.02, 200), seed=1)
    means = result.survival_mean
    assert all(b < a for a, b in zip(means, means[1:]))
    assert result.error_per_clifford > 0 and result.decay < 1
    assert abs(result.error_per_clifford - result.predicted_error) < 0.3 * result.predicted_error
    d = result.to_dict()
    assert set(d) == {"lengths", "survival_mean", "survival_std", "fit", "error_per_clifford", "predicted"}


def test_rb_config_validation():
    for bad in (dict(sequence_lengths=(4, 2)), dict(sequence_lengths=(0, 2)), dict(sequence_lengths=()),
                dict(gate_error_p=1.2), dict(sequences_per_length=0)):
        with pytest.raises(ValueError):
            RbConfig(**bad)


def test_rb_fit_failed_on_rising_curve():
    with pytest.raises(FitFailedError):
        run_rb(RbConfig(tuple(range(1, 9)), 1, 0.75, 20), seed=3)


def test_fit_decay_recovers_parameters():
    m = np.array([1, 2, 4, 8, 16, 32, 64])
    a, f, b = fit_decay(m, 0.45 * 0.97**m + 0.5)
    assert abs(f - 0.97) < 1e-6 and abs(a - 0.45) < 1e-5 and abs(b - 0.5) < 1e-5
