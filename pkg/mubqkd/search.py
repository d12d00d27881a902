"""Random max-min search over Alice/Bob's basis f and Evan's basis g.

Alice and Bob want the error rate as high as possible, Evan wants it as low as possible. For a fixed f the best
Evan can do is estimated by the minimum over many random g; the best f is the one with the largest such minimum.

Random streams are nested: f number t comes from (seed, t, 0) and its g's from (seed, t, 1), so every per-f
minimum is independent of execution order and worker layout, and a larger g budget only extends the same stream.
"""
import sys
import math
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from tqdm import tqdm

from .bases import (EXACT_TOLERANCE, TOLERANCE, Basis, check_dimension, computational_basis, fourier_mub_pair,
                    hadamard_mub_4, interpolated_g_basis, random_haar_bases)
from .error_rates import (batch_p_iter, batch_p_qber, p_iter_mub_analytic, p_iter_n4_alpha,
                          p_iter_simplified)
from .rng import as_generator, as_seed, check_seed, generator, FIG3_KEY, SCAN_KEY, SEARCH_KEY


__all__ = ['ITER', 'QBER', 'OBJECTIVES', 'SearchConfig', 'SearchResult', 'Table4Row',
           'evaluate', 'min_over_g', 'double_optimize', 'table3_row', 'fig1_scatter', 'iter_ceiling',
           'mub_scan', 'fig3_scatter', 'fig3_alpha_overlay', 'f_basis', 'TABLE3_COLUMNS', 'TABLE4_COLUMNS',
           'FIG1_COLUMNS', 'FIG3_COLUMNS', 'FIG3_ALPHA_COLUMNS']


logger = logging.getLogger(__name__)

ITER = 'ITER'
QBER = 'QBER'
OBJECTIVES = (ITER, QBER)

TABLE3_COLUMNS = ('n', 'iter_maxmin', 'qber_maxmin', 'f_samples', 'g_samples', 'seed')
TABLE4_COLUMNS = ('n', 'iter_min_numeric', 'iter_analytic')
FIG1_COLUMNS = ('f_id', 'min_iter', 'ceiling')
FIG3_COLUMNS = ('g_id', 'iter')
FIG3_ALPHA_COLUMNS = ('alpha', 'iter_numeric', 'iter_analytic')


class SearchConfig(object):
    """Budgets and seed of a search. Change the class defaults to change every search."""
    DEFAULT_F_SAMPLES = 10000
    DEFAULT_G_SAMPLES = 10000
    DEFAULT_SCAN_SAMPLES = 1000000
    FULL_F_SAMPLES = 100000
    FULL_G_SAMPLES = 100000
    FULL_SCAN_SAMPLES = 5000000
    FIG1_F_COUNT = 2500
    FIG3_G_COUNT = 100000
    CHUNK = 4096  # g's evaluated per batch
    F_BATCH = 64  # f's handed to a worker at once

    def __init__(self, n, f_samples=None, g_samples=None, seed=0, objective=ITER):
        """Initialize the search configuration.

        Args:
            n (int): Dimension.
            f_samples (int)[None]: Number of random f's. Defaults to DEFAULT_F_SAMPLES.
            g_samples (int)[None]: Number of random g's per f. Defaults to DEFAULT_G_SAMPLES.
            seed (int)[0]: 64-bit seed.
            objective (str)['ITER']: 'ITER' or 'QBER'.
        """
        if f_samples is None:
            f_samples = self.DEFAULT_F_SAMPLES
        if g_samples is None:
            g_samples = self.DEFAULT_G_SAMPLES
        if objective not in OBJECTIVES:
            raise ValueError('Objective must be one of {}, got {!r}'.format(OBJECTIVES, objective))
        if int(f_samples) < 1 or int(g_samples) < 1:
            raise ValueError('f_samples and g_samples must be at least 1, got {} and {}'.format(f_samples, g_samples))

        self.n = check_dimension(n)
        self.f_samples = int(f_samples)
        self.g_samples = int(g_samples)
        self.seed = check_seed(seed)
        self.objective = objective

    def as_dict(self):
        return {'n': self.n, 'f_samples': self.f_samples, 'g_samples': self.g_samples, 'seed': self.seed,
                'objective': self.objective}

    def __repr__(self):
        return '{}({})'.format(self.__class__.__name__,
                               ', '.join('{}={!r}'.format(k, v) for k, v in self.as_dict().items()))


class SearchResult(object):
    """Best f found by double_optimize and its max-min error rate."""

    def __init__(self, best_f, max_min_value, config, per_f_minima=None, best_f_id=None):
        self.best_f = best_f
        self.max_min_value = max_min_value
        self.config = config
        self.per_f_minima = per_f_minima
        self.best_f_id = best_f_id

    def as_dict(self):
        d = {'max_min_value': self.max_min_value, 'best_f_id': self.best_f_id, 'config': self.config.as_dict()}
        if self.per_f_minima is not None:
            d['per_f_minima'] = list(self.per_f_minima)
        return d

    def __repr__(self):
        return '{}(max_min_value={!r}, best_f_id={!r}, config={!r})'.format(
            self.__class__.__name__, self.max_min_value, self.best_f_id, self.config)


class Table4Row(object):
    """One row of the mutually unbiased scan plus any g found below the analytic bound."""

    def __init__(self, n, iter_min_numeric, iter_analytic, g_samples=0, seed=0, violations=None):
        self.n = n
        self.iter_min_numeric = iter_min_numeric
        self.iter_analytic = iter_analytic
        self.g_samples = g_samples
        self.seed = seed
        self.violations = violations or []

    def as_row(self):
        return {'n': self.n, 'iter_min_numeric': self.iter_min_numeric, 'iter_analytic': self.iter_analytic}

    def __repr__(self):
        return '{}(n={}, iter_min_numeric={!r}, iter_analytic={!r}, violations={})'.format(
            self.__class__.__name__, self.n, self.iter_min_numeric, self.iter_analytic, len(self.violations))


def evaluate(objective, e, f, g_stack):
    """Return the objective for every g in the stack (NaN where the QBER is undefined)."""
    if objective == ITER:
        return batch_p_iter(e, f, g_stack)
    elif objective == QBER:
        return batch_p_qber(e, f, g_stack)
    raise ValueError('Objective must be one of {}, got {!r}'.format(OBJECTIVES, objective))


def _g_chunks(n, g_samples, rng, seeded=(), chunk=None):
    """Yield (offset, stack) batches: the seeded bases first, then Haar-random ones up to g_samples in total."""
    chunk = chunk or SearchConfig.CHUNK
    offset = 0
    if seeded:
        stack = np.array([getattr(g, 'matrix', g) for g in seeded][:g_samples], dtype=complex)
        yield offset, stack
        offset += len(stack)
    while offset < g_samples:
        count = min(chunk, g_samples - offset)
        yield offset, random_haar_bases(n, count, rng)
        offset += count


def min_over_g(e, f, g_samples, objective=ITER, rng_state=0, seeded=(), chunk=None):
    """Return Evan's best error rate over random g's for the fixed pair (e, f).

    Args:
        e (Basis): Alice and Bob's "0" basis.
        f (Basis): Alice and Bob's "1" basis.
        g_samples (int): Number of g's evaluated, seeded ones included.
        objective (str)['ITER']: 'ITER' or 'QBER'.
        rng_state (np.random.Generator/int)[0]: Generator or seed of the g stream.
        seeded (tuple)[()]: Bases evaluated before the random ones.
        chunk (int)[None]: Batch size. Does not change the result.

    Returns:
        min_value (float): Minimum of the objective, None if it was undefined for every g.
        argmin (Basis): First g reaching the minimum, None if min_value is None.
    """
    rng = as_generator(rng_state, SEARCH_KEY)
    best_value, best_g = None, None
    for _, stack in _g_chunks(e.n, int(g_samples), rng, seeded=seeded, chunk=chunk):
        values = evaluate(objective, e, f, stack)
        if np.all(np.isnan(values)):
            continue
        idx = int(np.nanargmin(values))
        if best_value is None or values[idx] < best_value:
            best_value, best_g = float(values[idx]), stack[idx]
    if best_g is not None:
        best_g = Basis.from_matrix(best_g, label='G')
    return best_value, best_g


def f_basis(n, seed, f_id):
    """Return the f basis number f_id of the search stream for the seed."""
    return Basis.from_matrix(random_haar_bases(n, 1, generator(seed, SEARCH_KEY, f_id, 0))[0], label='F')


def _f_minima(args):
    """Return the per-f minima for a batch of f indices."""
    n, objective, g_samples, seed, f_ids, chunk = args
    e = computational_basis(n)
    minima = []
    for t in f_ids:
        f = f_basis(n, seed, t)
        value, _ = min_over_g(e, f, g_samples, objective, generator(seed, SEARCH_KEY, t, 1), chunk=chunk)
        minima.append(np.nan if value is None else value)
    return minima


def _all_minima(n, objective, f_count, g_samples, seed, workers=1, progress=False, chunk=None):
    batch = SearchConfig.F_BATCH
    tasks = [(n, objective, g_samples, seed, range(start, min(start + batch, f_count)), chunk)
             for start in range(0, f_count, batch)]
    bar = tqdm(total=f_count, disable=not progress, file=sys.stderr, desc='n={} {}'.format(n, objective))
    minima = []
    try:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                for result in executor.map(_f_minima, tasks):
                    minima.extend(result)
                    bar.update(len(result))
        else:
            for task in tasks:
                result = _f_minima(task)
                minima.extend(result)
                bar.update(len(result))
    finally:
        bar.close()
    return np.array(minima, dtype=float)


def _as_values(minima):
    return [None if np.isnan(m) else float(m) for m in minima]


def double_optimize(config, workers=1, keep_minima=True, progress=False):
    """Estimate max over f of min over g of the objective with e fixed to the computational basis.

    An f for which the objective is undefined for every g (QBER only) records None as its minimum and never wins.

    Args:
        config (SearchConfig): Dimension, budgets, seed and objective.
        workers (int)[1]: Processes for the f loop. Results do not depend on it.
        keep_minima (bool)[True]: If True keep every per-f minimum in the result.
        progress (bool)[False]: If True show a progress bar on stderr.

    Returns:
        result (SearchResult): Best f, its minimum and optionally all minima.
    """
    logger.info('Double optimization: %r', config)
    minima = _all_minima(config.n, config.objective, config.f_samples, config.g_samples, config.seed,
                         workers=workers, progress=progress)
    if np.all(np.isnan(minima)):
        logger.warning('Objective %s undefined for every f and g', config.objective)
        return SearchResult(None, None, config, per_f_minima=_as_values(minima) if keep_minima else None)

    best = int(np.nanargmax(minima))
    value = float(minima[best])
    logger.info('n=%d %s max-min %.6f at f #%d', config.n, config.objective, value, best)
    return SearchResult(f_basis(config.n, config.seed, best), value, config,
                        per_f_minima=_as_values(minima) if keep_minima else None, best_f_id=best)


def table3_row(n, f_samples=None, g_samples=None, seed=0, workers=1, progress=False):
    """Return the table3.csv row: max-min ITER and max-min QBER over the same f and g streams."""
    results = {}
    for objective in OBJECTIVES:
        config = SearchConfig(n, f_samples, g_samples, seed=seed, objective=objective)
        results[objective] = double_optimize(config, workers=workers, keep_minima=False, progress=progress)
    config = results[ITER].config
    return {'n': config.n, 'iter_maxmin': results[ITER].max_min_value, 'qber_maxmin': results[QBER].max_min_value,
            'f_samples': config.f_samples, 'g_samples': config.g_samples, 'seed': config.seed}


def iter_ceiling(n):
    """Return the (n-1)/(2n) reference line of the per-f minima."""
    return p_iter_mub_analytic(n)


def fig1_scatter(n, f_count, g_samples, rng_state=0, workers=1, progress=False):
    """Return [(f_id, min_iter)] for f_count random f's.

    rng_state is a seed or a Generator to draw one from; the f and g streams are the ones double_optimize uses
    with that seed. An f whose minimum is undefined gets None.
    """
    n = check_dimension(n)
    if f_count <= 0:
        return []
    minima = _all_minima(n, ITER, int(f_count), int(g_samples), as_seed(rng_state), workers=workers,
                         progress=progress)
    return list(enumerate(_as_values(minima)))


def mub_scan(n, g_samples, rng_state=0, include_reference=False, chunk=None):
    """Scan random g's against the computational/Fourier pair.

    Args:
        n (int): Dimension.
        g_samples (int): Number of g's, the reference g = e included.
        rng_state (np.random.Generator/int)[0]: Generator or seed.
        include_reference (bool)[False]: If True evaluate g = e first, which reaches (n-1)/(2n) exactly.
        chunk (int)[None]: Batch size. Does not change the result.

    Returns:
        min_value (float): Minimum ITER found.
        row (Table4Row): Numeric minimum, analytic value and every g found below the analytic value.
    """
    n = check_dimension(n)
    pair = fourier_mub_pair(n)
    analytic = p_iter_mub_analytic(n)
    rng = as_generator(rng_state, SCAN_KEY, n)
    seeded = (pair.e,) if include_reference else ()

    best = None
    violations = []
    for offset, stack in _g_chunks(n, int(g_samples), rng, seeded=seeded, chunk=chunk):
        values = batch_p_iter(pair.e, pair.f, stack)
        for idx in np.flatnonzero(values < analytic - TOLERANCE):
            violations.append((offset + int(idx), float(values[idx]), Basis.from_matrix(stack[idx], label='G')))
        chunk_min = float(np.min(values))
        if best is None or chunk_min < best:
            best = chunk_min

    for g_id, value, _ in violations:
        logger.warning('n=%d: g #%d gives ITER %.12f below the analytic %.12f', n, g_id, value, analytic)
    seed = rng_state if isinstance(rng_state, int) else None
    return best, Table4Row(n, best, analytic, g_samples=int(g_samples), seed=seed, violations=violations)


def fig3_scatter(g_count, rng_state=0, chunk=None):
    """Return [(g_id, iter)] for random four-dimensional g's against the real N=4 mutually unbiased pair."""
    if g_count <= 0:
        return []
    pair = hadamard_mub_4()
    rng = as_generator(rng_state, FIG3_KEY)
    rows = []
    for offset, stack in _g_chunks(4, int(g_count), rng, chunk=chunk):
        values = batch_p_iter(pair.e, pair.f, stack)
        rows.extend((offset + i, float(v)) for i, v in enumerate(values))
    return rows


def fig3_alpha_overlay(alpha_count=100):
    """Return [(alpha, iter_numeric, iter_analytic)] along Evan's interpolated N=4 family."""
    pair = hadamard_mub_4()
    rows = []
    for alpha in np.linspace(0.0, 2 * math.pi, int(alpha_count), endpoint=False):
        g = interpolated_g_basis(pair, alpha)
        numeric = p_iter_simplified(pair.e, pair.f, g)
        analytic = p_iter_n4_alpha(alpha)
        if abs(numeric - analytic) > EXACT_TOLERANCE:
            logger.warning('alpha=%.6f: numeric ITER %.15f differs from %.15f', alpha, numeric, analytic)
        rows.append((float(alpha), numeric, analytic))
    return rows
