"""Monte Carlo run of the protocol with an optional intercept-resend eavesdropper.

Per round Alice picks a basis (e encodes "0", f encodes "1") and an index i, Evan (if present) measures in g and
forwards |g_k>, Bob measures in a random basis and gets index j. Alice announces i; the round is discarded when
j == i, otherwise Bob decodes "1" if he measured in e and "0" if he measured in f.
"""
import math
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bases import DimensionMismatch
from .rng import as_generator, as_seed, generator, PROTOCOL_KEY


__all__ = ['E', 'F', 'KEY_BIT', 'DISCARDED', 'BORN_TOLERANCE', 'MeasurementError', 'ProtocolError',
           'RoundInput', 'SiftRecord', 'SimulationSummary', 'Simulator',
           'born_measure', 'run_round', 'simulate', 'extract_key', 'standard_error']


logger = logging.getLogger(__name__)

E = 'E'
F = 'F'
BASES = (E, F)
KEY_BIT = 'KEY_BIT'
DISCARDED = 'DISCARDED'

BORN_TOLERANCE = 1e-6
PROBABILITY_FLOOR = 1e-14


class MeasurementError(ValueError):
    """Born probabilities do not add up to one, so the state was not a valid unit vector."""
    pass


class ProtocolError(ValueError):
    """Invalid round or simulation request."""
    pass


class RoundInput(object):
    """Random choices of one round. Indices are 1-based."""
    __slots__ = ('_alice_basis', '_alice_index', '_bob_basis', '_evan_present')

    def __init__(self, alice_basis, alice_index, bob_basis, evan_present=False, n=None):
        if alice_basis not in BASES or bob_basis not in BASES:
            raise ProtocolError('Bases must be one of {}, got {!r} and {!r}'.format(BASES, alice_basis, bob_basis))
        alice_index = int(alice_index)
        if alice_index < 1 or (n is not None and alice_index > n):
            raise ProtocolError('Alice index {} is outside 1..{}'.format(alice_index, n if n is not None else 'N'))
        self._alice_basis = alice_basis
        self._alice_index = alice_index
        self._bob_basis = bob_basis
        self._evan_present = bool(evan_present)

    alice_basis = property(lambda self: self._alice_basis)
    alice_index = property(lambda self: self._alice_index)
    bob_basis = property(lambda self: self._bob_basis)
    evan_present = property(lambda self: self._evan_present)

    @property
    def alice_bit(self):
        """All e states encode "0" and all f states encode "1"."""
        return 0 if self._alice_basis == E else 1

    def as_dict(self):
        return {'alice_basis': self._alice_basis, 'alice_index': self._alice_index, 'bob_basis': self._bob_basis,
                'evan_present': self._evan_present}

    def __repr__(self):
        return '{}({!r}, {!r}, {!r}, evan_present={!r})'.format(
            self.__class__.__name__, self._alice_basis, self._alice_index, self._bob_basis, self._evan_present)


class SiftRecord(object):
    """Outcome of one round after sifting."""
    __slots__ = ('_input', '_evan_index', '_bob_index', '_verdict', '_decoded_bit')

    def __init__(self, round_input, bob_index, evan_index=None):
        self._input = round_input
        self._evan_index = None if evan_index is None else int(evan_index)
        self._bob_index = int(bob_index)
        if self._bob_index == round_input.alice_index:
            self._verdict = DISCARDED
            self._decoded_bit = None
        else:
            self._verdict = KEY_BIT
            self._decoded_bit = 1 if round_input.bob_basis == E else 0

    input = property(lambda self: self._input)
    evan_index = property(lambda self: self._evan_index)
    bob_index = property(lambda self: self._bob_index)
    verdict = property(lambda self: self._verdict)
    decoded_bit = property(lambda self: self._decoded_bit)

    @property
    def alice_bit(self):
        return self._input.alice_bit

    def is_key_bit(self):
        return self._verdict == KEY_BIT

    def as_dict(self):
        d = self._input.as_dict()
        d.update({'evan_index': self._evan_index, 'bob_index': self._bob_index, 'verdict': self._verdict,
                  'decoded_bit': self._decoded_bit, 'alice_bit': self.alice_bit})
        return d

    def __repr__(self):
        return '{}({!r}, evan_index={!r}, bob_index={!r}, verdict={!r})'.format(
            self.__class__.__name__, self._input, self._evan_index, self._bob_index, self._verdict)


def standard_error(p, count):
    """Return the binomial standard error sqrt(p (1 - p) / count)."""
    if count <= 0:
        return float('inf')
    return math.sqrt(max(p * (1 - p), 0.0) / count)


class SimulationSummary(object):
    """Counts of a simulation run and the rates estimated from them."""

    def __init__(self, rounds=0, sifted=0, index_errors=0, index_comparisons=0, bit_errors=0, seed=0,
                 config=None, threshold=None):
        self.rounds = int(rounds)
        self.sifted = int(sifted)
        self.index_errors = int(index_errors)
        self.index_comparisons = int(index_comparisons)
        self.bit_errors = int(bit_errors)
        self.seed = int(seed)
        self.config = dict(config or {})
        self.threshold = threshold

    @property
    def empirical_iter(self):
        """Index errors over same-basis rounds, None without any same-basis round."""
        if self.index_comparisons == 0:
            return None
        return self.index_errors / self.index_comparisons

    @property
    def empirical_qber(self):
        """Wrong decoded bits over key bits, None without any key bit."""
        if self.sifted == 0:
            return None
        return self.bit_errors / self.sifted

    @property
    def empirical_efficiency(self):
        return self.sifted / self.rounds if self.rounds else 0.0

    @property
    def eavesdropper_detected(self):
        """Return True if a threshold was given and the ITER exceeds it."""
        if self.threshold is None or self.empirical_iter is None:
            return False
        return self.empirical_iter > self.threshold

    def iter_stderr(self, p=None):
        p = self.empirical_iter if p is None else p
        return standard_error(p or 0.0, self.index_comparisons)

    def qber_stderr(self, p=None):
        p = self.empirical_qber if p is None else p
        return standard_error(p or 0.0, self.sifted)

    def efficiency_stderr(self, p=None):
        p = self.empirical_efficiency if p is None else p
        return standard_error(p, self.rounds)

    def add_counts(self, counts):
        """Add the counts of one shard."""
        for key in ('rounds', 'sifted', 'index_errors', 'index_comparisons', 'bit_errors'):
            setattr(self, key, getattr(self, key) + int(counts[key]))

    def as_dict(self):
        return {'rounds': self.rounds, 'sifted': self.sifted, 'index_errors': self.index_errors,
                'index_comparisons': self.index_comparisons, 'bit_errors': self.bit_errors,
                'empirical_iter': self.empirical_iter, 'empirical_qber': self.empirical_qber,
                'empirical_efficiency': self.empirical_efficiency, 'seed': self.seed,
                'threshold': self.threshold, 'eavesdropper_detected': self.eavesdropper_detected,
                'config': self.config}

    def __repr__(self):
        return '{}(rounds={}, sifted={}, empirical_iter={!r}, empirical_qber={!r})'.format(
            self.__class__.__name__, self.rounds, self.sifted, self.empirical_iter, self.empirical_qber)


def _inverse_cdf(probabilities, u):
    """Return 0-based outcomes for rows of probabilities and uniforms u. The last bucket absorbs rounding residue."""
    cdf = np.cumsum(probabilities, axis=-1)
    return np.sum(u[..., None] >= cdf[..., :-1], axis=-1)


def born_measure(state, basis, rng_state):
    """Measure the state in the basis and return the 1-based outcome index.

    Args:
        state (ComplexVector/np.ndarray): State to measure.
        basis (Basis): Measurement basis.
        rng_state (np.random.Generator/int): Generator or seed. One uniform is drawn.

    Raises:
        DimensionMismatch: If the state and basis dimensions differ.
        MeasurementError: If the probabilities do not sum to 1 within 1e-6.
    """
    state = np.asarray(state, dtype=complex)
    matrix = basis.matrix
    if state.shape != (matrix.shape[0],):
        raise DimensionMismatch('Cannot measure a state of dimension {} in a basis of dimension {}'.format(
            state.shape[0] if state.ndim else 0, matrix.shape[0]))
    probabilities = np.abs(matrix.conj() @ state) ** 2
    total = float(np.sum(probabilities))
    if abs(total - 1.0) > BORN_TOLERANCE:
        raise MeasurementError('Measurement probabilities sum to {!r}, not 1'.format(total))
    u = as_generator(rng_state, PROTOCOL_KEY).random()
    return int(_inverse_cdf(probabilities, np.asarray(u))) + 1


def _clean(probabilities):
    """Zero out numerical dust below PROBABILITY_FLOOR and renormalize the last axis."""
    probabilities = np.where(probabilities < PROBABILITY_FLOOR, 0.0, probabilities)
    total = np.sum(probabilities, axis=-1, keepdims=True)
    if np.any(np.abs(total - 1.0) > BORN_TOLERANCE):
        raise MeasurementError('Transition probabilities do not sum to 1; check that all bases are orthonormal')
    return probabilities / total


def _transition_tables(pair, g=None):
    """Return the probability tables used by the vectorized rounds.

    Without Evan: direct[a, b, i, j] = |<b_j|a_i>|^2.
    With Evan: evan[a, i, k] = |<g_k|a_i>|^2 and bob[b, k, j] = |<b_j|g_k>|^2.
    """
    bases = [pair.e.matrix, pair.f.matrix]
    if g is None:
        direct = np.array([[np.abs(a @ b.conj().T) ** 2 for b in bases] for a in bases])
        return {'direct': _clean(direct)}

    gm = g.matrix
    evan = np.array([np.abs(a @ gm.conj().T) ** 2 for a in bases])
    bob = np.array([np.abs(gm @ b.conj().T) ** 2 for b in bases])
    return {'evan': _clean(evan), 'bob': _clean(bob)}


def _run_shard(tables, n, seed, shard, rounds, keep_records=False):
    """Run one shard of rounds from its own substream and return its counts (and arrays if requested)."""
    # Fixed draw order per round: alice_basis, alice_index, evan, bob_basis, bob_measure
    u = generator(seed, PROTOCOL_KEY, shard).random((rounds, 5))
    alice_basis = (u[:, 0] >= 0.5).astype(np.int64)
    alice_index = np.minimum((u[:, 1] * n).astype(np.int64), n - 1)
    bob_basis = (u[:, 3] >= 0.5).astype(np.int64)

    if 'direct' in tables:
        evan_index = None
        probabilities = tables['direct'][alice_basis, bob_basis, alice_index]
    else:
        evan_index = _inverse_cdf(tables['evan'][alice_basis, alice_index], u[:, 2])
        probabilities = tables['bob'][bob_basis, evan_index]
    bob_index = _inverse_cdf(probabilities, u[:, 4])

    same_basis = alice_basis == bob_basis
    key = bob_index != alice_index
    decoded = 1 - bob_basis
    counts = {'rounds': rounds,
              'sifted': int(np.count_nonzero(key)),
              'index_errors': int(np.count_nonzero(same_basis & key)),
              'index_comparisons': int(np.count_nonzero(same_basis)),
              'bit_errors': int(np.count_nonzero(key & (decoded != alice_basis)))}
    logger.debug('Shard %d: %d rounds, %d sifted', shard, rounds, counts['sifted'])

    arrays = None
    if keep_records:
        arrays = {'alice_basis': alice_basis, 'alice_index': alice_index, 'bob_basis': bob_basis,
                  'bob_index': bob_index, 'evan_index': evan_index}
    return counts, arrays


def _run_shard_task(args):
    return _run_shard(*args)


class Simulator(object):
    """Protocol run for a fixed pair of bases and an optional eavesdropper basis g."""
    SHARD_ROUNDS = 65536  # Fixed, so the streams never depend on the worker count

    def __init__(self, pair, g=None, workers=1):
        """Initialize the simulator.

        Args:
            pair (BasisPair): Alice and Bob's bases.
            g (Basis)[None]: Evan's measurement basis. None means no eavesdropper.
            workers (int)[1]: Number of processes for the shards. Results do not depend on it.
        """
        if g is not None and g.n != pair.n:
            raise DimensionMismatch('Evan basis has dimension {} but the pair has {}'.format(g.n, pair.n))
        self.pair = pair
        self.g = g
        self.workers = max(int(workers or 1), 1)
        self._tables = None

    @property
    def n(self):
        return self.pair.n

    @property
    def evan_present(self):
        return self.g is not None

    @property
    def tables(self):
        if self._tables is None:
            self._tables = _transition_tables(self.pair, self.g)
        return self._tables

    def run_round(self, round_input, rng_state):
        """Run one round by preparing, measuring and forwarding the actual state vectors.

        Args:
            round_input (RoundInput): Alice's and Bob's choices.
            rng_state (np.random.Generator/int): Evan's measurement draws first, then Bob's.

        Returns:
            record (SiftRecord): Sifted outcome of the round.
        """
        if round_input.alice_index > self.n:
            raise ProtocolError('Alice index {} is outside 1..{}'.format(round_input.alice_index, self.n))
        if round_input.evan_present and self.g is None:
            raise ProtocolError('Evan is present in the round but no g basis was given')
        rng = as_generator(rng_state, PROTOCOL_KEY)

        alice = self.pair.e if round_input.alice_basis == E else self.pair.f
        state = alice.matrix[round_input.alice_index - 1]

        evan_index = None
        if round_input.evan_present:
            evan_index = born_measure(state, self.g, rng)
            state = self.g.matrix[evan_index - 1]  # Forward the outcome state as is

        bob = self.pair.e if round_input.bob_basis == E else self.pair.f
        bob_index = born_measure(state, bob, rng)
        return SiftRecord(round_input, bob_index, evan_index=evan_index)

    def shards(self, rounds):
        """Return the (shard, size) list for the given number of rounds."""
        count = (rounds + self.SHARD_ROUNDS - 1) // self.SHARD_ROUNDS
        return [(s, min(self.SHARD_ROUNDS, rounds - s * self.SHARD_ROUNDS)) for s in range(count)]

    def simulate(self, rounds, seed, keep_records=False, threshold=None, config=None):
        """Run the protocol for the given number of rounds.

        Args:
            rounds (int): Number of photons sent. Must be at least 1.
            seed (int/np.random.Generator): 64-bit seed, or a Generator to draw one from. Identical seeds give
                identical summaries and records.
            keep_records (bool)[False]: If True also return the per-round SiftRecord stream.
            threshold (float)[None]: ITER above which the eavesdropper counts as detected.
            config (dict)[None]: Extra settings to echo in the summary.

        Returns:
            summary (SimulationSummary): Counts and empirical rates.
            records (iterator/None): SiftRecord objects in round order if keep_records else None.
        """
        rounds = int(rounds)
        if rounds < 1:
            raise ProtocolError('Need at least 1 round, got {}'.format(rounds))
        seed = as_seed(seed)
        echo = {'n': self.n, 'rounds': rounds, 'evan_present': self.evan_present}
        echo.update(config or {})
        summary = SimulationSummary(seed=seed, config=echo, threshold=threshold)

        tasks = [(self.tables, self.n, seed, shard, size, keep_records) for shard, size in self.shards(rounds)]
        logger.info('Simulating %d rounds (n=%d, evan=%s, seed=%d) in %d shards', rounds, self.n,
                    self.evan_present, seed, len(tasks))
        if self.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                results = list(executor.map(_run_shard_task, tasks))
        else:
            results = [_run_shard_task(task) for task in tasks]

        for counts, _ in results:
            summary.add_counts(counts)
        logger.info('Finished: %r', summary)

        records = None
        if keep_records:
            records = self._iter_records([arrays for _, arrays in results])
        return summary, records

    def _iter_records(self, shard_arrays):
        for arrays in shard_arrays:
            evan = arrays['evan_index']
            for r in range(len(arrays['alice_index'])):
                round_input = RoundInput(BASES[arrays['alice_basis'][r]], arrays['alice_index'][r] + 1,
                                         BASES[arrays['bob_basis'][r]], evan_present=evan is not None)
                yield SiftRecord(round_input, arrays['bob_index'][r] + 1,
                                 evan_index=None if evan is None else evan[r] + 1)


def run_round(pair, g, round_input, rng_state):
    """Run one round. See Simulator.run_round."""
    return Simulator(pair, g).run_round(round_input, rng_state)


def simulate(pair, g, rounds, rng_state, workers=1, keep_records=False, threshold=None, config=None):
    """Run the protocol. See Simulator.simulate; rng_state is a seed or a Generator."""
    return Simulator(pair, g, workers=workers).simulate(rounds, rng_state, keep_records=keep_records,
                                                        threshold=threshold, config=config)


def extract_key(records):
    """Return Alice's and Bob's key bits over the KEY_BIT rounds, in order."""
    alice, bob = [], []
    for record in records:
        if record.is_key_bit():
            alice.append(record.alice_bit)
            bob.append(record.decoded_bit)
    return alice, bob
