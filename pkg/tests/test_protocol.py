import math

import numpy as np
import pytest

from mubqkd import (DISCARDED, KEY_BIT, BasisPair, DimensionMismatch, MeasurementError, ProtocolError, RoundInput,
                    SiftRecord, SimulationSummary, Simulator, born_measure, computational_basis, extract_key,
                    fourier_mub_pair, generator, hadamard_mub_4, p_iter_simplified, p_qber, random_haar_basis,
                    rotation_basis_2d, rotation_pair_2d, run_round, simulate, standard_error)


def within(value, expected, stderr, sigmas=4):
    return abs(value - expected) <= sigmas * stderr


def test_sift_rule():
    round_input = RoundInput('E', 2, 'F', n=4)
    assert round_input.alice_bit == 0

    record = SiftRecord(round_input, 2)
    assert record.verdict == DISCARDED
    assert record.decoded_bit is None
    assert not record.is_key_bit()

    record = SiftRecord(round_input, 3)
    assert record.verdict == KEY_BIT
    assert record.decoded_bit == 0
    assert record.alice_bit == 0

    record = SiftRecord(RoundInput('F', 1, 'E'), 4, evan_index=2)
    assert record.decoded_bit == 1
    assert record.alice_bit == 1
    assert record.as_dict() == {'alice_basis': 'F', 'alice_index': 1, 'bob_basis': 'E', 'evan_present': False,
                                'evan_index': 2, 'bob_index': 4, 'verdict': KEY_BIT, 'decoded_bit': 1,
                                'alice_bit': 1}


def test_round_input_errors():
    with pytest.raises(ProtocolError):
        RoundInput('G', 1, 'E')
    with pytest.raises(ProtocolError):
        RoundInput('E', 0, 'E')
    with pytest.raises(ProtocolError):
        RoundInput('E', 5, 'E', n=4)


def test_born_measure():
    e, f = hadamard_mub_4()
    for seed in range(20):
        assert born_measure(e[2], e, seed) == 3

    rng = generator(0, 42)
    outcomes = np.array([born_measure(e[0], f, rng) for _ in range(20000)])
    frequencies = np.bincount(outcomes, minlength=5)[1:] / len(outcomes)
    sigma = math.sqrt(0.25 * 0.75 / len(outcomes))
    assert np.all(np.abs(frequencies - 0.25) < 4 * sigma)


def test_born_measure_errors():
    e = computational_basis(2)
    with pytest.raises(MeasurementError):
        born_measure(np.array([1, 1], dtype=complex), e, 0)
    with pytest.raises(DimensionMismatch):
        born_measure(np.array([1, 0, 0], dtype=complex), e, 0)


def test_run_round(mub4):
    rng = generator(3, 1)
    for _ in range(200):
        record = run_round(mub4, None, RoundInput('F', 2, 'F'), rng)
        assert record.verdict == DISCARDED
        assert record.evan_index is None

    record = run_round(mub4, mub4.e, RoundInput('E', 3, 'E', evan_present=True), rng)
    assert record.evan_index == 3
    assert record.bob_index == 3

    with pytest.raises(ProtocolError):
        run_round(mub4, None, RoundInput('E', 1, 'E', evan_present=True), rng)
    with pytest.raises(ProtocolError):
        run_round(mub4, None, RoundInput('E', 5, 'E'), rng)



def test_run_round_evan_in_e_lattice(mub4):
    # Alice sends f_1, Evan measures in e: k is uniform and |e_k> reaches Bob as is
    simulator = Simulator(mub4, mub4.e)
    rng = generator(6, 1)
    rounds = 4000
    for bob_basis, wrong_bit, lattice in [('E', 0, np.eye(4) / 4), ('F', 1, np.full((4, 4), 1 / 16))]:
        records = [simulator.run_round(RoundInput('F', 1, bob_basis, evan_present=True), rng) for _ in range(rounds)]
        counts = np.zeros((4, 4))
        for record in records:
            counts[record.evan_index - 1, record.bob_index - 1] += 1
        frequencies = counts / rounds
        sigma = np.sqrt(lattice * (1 - lattice) / rounds)
        assert np.all(np.abs(frequencies - lattice) <= 4 * sigma + 1e-12)

        key = [r for r in records if r.is_key_bit()]
        assert within(len(key) / rounds, 0.75, standard_error(0.75, rounds))
        assert all(r.decoded_bit == 1 - wrong_bit for r in key)
        assert sum(r.decoded_bit != r.alice_bit for r in key) == wrong_bit * len(key)


def test_standard_error():
    assert standard_error(0.5, 100) == pytest.approx(0.05)
    assert standard_error(0.0, 100) == 0.0
    assert standard_error(0.5, 0) == float('inf')


def test_no_evan_is_exact(mub4):
    summary, _ = simulate(mub4, None, 50000, 11)
    assert summary.rounds == 50000
    assert summary.index_errors == 0
    assert summary.bit_errors == 0
    assert summary.empirical_iter == 0.0
    assert summary.empirical_qber == 0.0
    assert within(summary.empirical_efficiency, 0.375, summary.efficiency_stderr(0.375))
    assert not summary.eavesdropper_detected


def test_evan_in_e(mub4):
    summary, _ = simulate(mub4, mub4.e, 100000, 1, threshold=0.1)
    assert within(summary.empirical_iter, 0.375, summary.iter_stderr(0.375))
    assert within(summary.empirical_qber, 1 / 3, summary.qber_stderr(1 / 3))
    assert within(summary.empirical_efficiency, 9 / 16, summary.efficiency_stderr(9 / 16))
    assert summary.eavesdropper_detected
    assert summary.as_dict()['eavesdropper_detected'] is True


def test_random_triple_matches_closed_form():
    e = computational_basis(3)
    f = random_haar_basis(3, 21, label='F')
    g = random_haar_basis(3, 22)
    summary, _ = simulate(BasisPair(e, f), g, 100000, 5)
    iter_ = p_iter_simplified(e, f, g)
    qber = p_qber(e, f, g)
    assert within(summary.empirical_iter, iter_, summary.iter_stderr(iter_))
    assert within(summary.empirical_qber, qber, summary.qber_stderr(qber))


def test_same_seed_same_result(mub4):
    a, _ = simulate(mub4, mub4.f, 20000, 9)
    b, _ = simulate(mub4, mub4.f, 20000, 9)
    c, _ = simulate(mub4, mub4.f, 20000, 10)
    assert a.as_dict() == b.as_dict()
    assert a.as_dict() != c.as_dict()


def test_workers_do_not_change_results(monkeypatch, mub4):
    monkeypatch.setattr(Simulator, 'SHARD_ROUNDS', 1000)
    serial, _ = simulate(mub4, mub4.e, 5500, 4, workers=1)
    parallel, _ = simulate(mub4, mub4.e, 5500, 4, workers=3)
    assert serial.as_dict() == parallel.as_dict()
    assert len(Simulator(mub4).shards(5500)) == 6


def test_records(mub4):
    summary, records = simulate(mub4, mub4.e, 3000, 2, keep_records=True)
    records = list(records)
    assert len(records) == 3000
    assert sum(r.is_key_bit() for r in records) == summary.sifted
    assert all(r.evan_index is not None for r in records)

    alice, bob = extract_key(records)
    assert len(alice) == len(bob) == summary.sifted
    assert sum(a != b for a, b in zip(alice, bob)) == summary.bit_errors

    _, none = simulate(mub4, mub4.e, 10, 2)
    assert none is None



def test_no_evan_keys_agree(mub4):
    summary, records = simulate(mub4, None, 10000, 13, keep_records=True)
    records = list(records)
    for record in records:
        assert record.evan_index is None
        assert record.is_key_bit() == (record.bob_index != record.input.alice_index)
        if record.is_key_bit():
            assert record.decoded_bit == record.alice_bit

    alice, bob = extract_key(records)
    assert alice == bob
    assert len(alice) == summary.sifted
    assert within(summary.empirical_efficiency, 0.375, summary.efficiency_stderr(0.375))


def test_simulate_accepts_generator(mub4):
    a, _ = simulate(mub4, mub4.e, 3000, generator(5))
    b, _ = simulate(mub4, mub4.e, 3000, generator(5))
    assert a.as_dict() == b.as_dict()

    seed = int(generator(5).integers(0, 2 ** 64, dtype=np.uint64))
    c, _ = simulate(mub4, mub4.e, 3000, seed)
    assert a.seed == seed
    assert a.as_dict() == c.as_dict()


def test_simulate_errors(mub4):
    with pytest.raises(ProtocolError):
        simulate(mub4, None, 0, 1)
    with pytest.raises(ValueError):
        simulate(mub4, None, 10, -1)
    with pytest.raises(DimensionMismatch):
        Simulator(mub4, computational_basis(3))


def test_summary_without_comparisons():
    summary = SimulationSummary(rounds=0, threshold=0.1)
    assert summary.empirical_iter is None
    assert summary.empirical_qber is None
    assert summary.empirical_efficiency == 0.0
    assert not summary.eavesdropper_detected


@pytest.mark.slow
def test_acceptance_mub_evan_in_e(mub4):
    summary, _ = simulate(mub4, mub4.e, 1000000, 7, workers=4)
    assert within(summary.empirical_iter, 0.375, summary.iter_stderr(0.375))
    assert within(summary.empirical_qber, 1 / 3, summary.qber_stderr(1 / 3))


@pytest.mark.slow
def test_acceptance_n2_flat_rate():
    pair = rotation_pair_2d(math.pi / 4)
    g = rotation_basis_2d(1.234, label='G')
    summary, _ = simulate(pair, g, 1000000, 8, workers=4)
    assert within(summary.empirical_iter, 0.25, summary.iter_stderr(0.25))


@pytest.mark.slow
def test_acceptance_no_evan_n3():
    pair = fourier_mub_pair(3)
    summary, _ = simulate(pair, None, 1000000, 9, workers=4)
    assert summary.index_errors == summary.bit_errors == 0
    assert within(summary.empirical_efficiency, 1 / 3, summary.efficiency_stderr(1 / 3))


if __name__ == '__main__':
    test_sift_rule()
    test_round_input_errors()
    test_born_measure()
    test_born_measure_errors()
    test_standard_error()
    test_summary_without_comparisons()
