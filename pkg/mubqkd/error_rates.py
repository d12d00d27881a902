"""Closed-form error rates of an intercept-resend attack.

Alice prepares |e_i> or |f_i>, Evan measures in g and forwards |g_k>, Bob measures in e or f. Everything below is
a function of the squared overlaps

    a[k, i] = |<g_k|e_i>|^2      b[k, i] = |<g_k|f_i>|^2

All sums go through numpy's pairwise summation.
"""
import math

import numpy as np

from .bases import DimensionMismatch, check_dimension


__all__ = ['QBER_DENOMINATOR_TOLERANCE', 'RANGE_TOLERANCE', 'ErrorRateReport',
           'squared_overlaps', 'p_iter_general', 'p_iter_simplified', 'p_ic', 'p_qber', 'p_ic_ideal',
           'p_iter_n2_analytic', 'p_iter_n4_alpha', 'p_iter_mub_analytic', 'p_success',
           'rates_report', 'pair_upper_bound', 'batch_squared_overlaps', 'batch_p_iter', 'batch_p_qber']


QBER_DENOMINATOR_TOLERANCE = 1e-12
RANGE_TOLERANCE = 1e-12


def _probability(value):
    """Snap rounding noise just outside [0, 1] back into the interval."""
    value = float(value)
    if -RANGE_TOLERANCE <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + RANGE_TOLERANCE:
        return 1.0
    return value


class ErrorRateReport(object):
    """Error rates for one (e, f, g) triple.

    p_qber is None when it is undefined (no index ever changes, e.g. e == f == g).
    """
    __slots__ = ('_p_iter', '_p_qber', '_p_ic', '_p_success')

    def __init__(self, p_iter, p_qber, p_ic, p_success):
        self._p_iter = self._check('p_iter', p_iter)
        self._p_qber = None if p_qber is None else self._check('p_qber', p_qber)
        self._p_ic = self._check('p_ic', p_ic)
        self._p_success = self._check('p_success', p_success)

    @staticmethod
    def _check(name, value):
        value = _probability(value)
        if not (0.0 <= value <= 1.0):
            raise ValueError('{} must be a probability, got {!r}'.format(name, value))
        return value

    p_iter = property(lambda self: self._p_iter)
    p_qber = property(lambda self: self._p_qber)
    p_ic = property(lambda self: self._p_ic)
    p_success = property(lambda self: self._p_success)

    @property
    def qber_defined(self):
        return self._p_qber is not None

    def as_dict(self):
        """Return the JSON form. An undefined QBER is kept as None (null)."""
        return {'iter': self._p_iter, 'qber': self._p_qber, 'ic': self._p_ic, 'success': self._p_success}

    def __repr__(self):
        return '{}(p_iter={!r}, p_qber={!r}, p_ic={!r}, p_success={!r})'.format(
            self.__class__.__name__, self._p_iter, self._p_qber, self._p_ic, self._p_success)


def _matrices(*bases):
    matrices = [np.asarray(getattr(b, 'matrix', b), dtype=complex) for b in bases]
    shape = matrices[0].shape
    for m in matrices[1:]:
        if m.shape != shape:
            raise DimensionMismatch('Bases have different dimensions {} and {}'.format(shape[0], m.shape[0]))
    return matrices


def squared_overlaps(e, f, g):
    """Return (a, b) with a[k, i] = |<g_k|e_i>|^2 and b[k, i] = |<g_k|f_i>|^2."""
    e, f, g = _matrices(e, f, g)
    a = np.abs(g.conj() @ e.T) ** 2
    b = np.abs(g.conj() @ f.T) ** 2
    return a, b


def p_iter_general(e, f, g):
    """Return the index transmission error rate from the full triple sum over i, k and j != i.

    P_ITER = 1/(2N) sum_i sum_k sum_{j != i} [ |<e_i|g_k>|^2 |<g_k|e_j>|^2 + |<f_i|g_k>|^2 |<g_k|f_j>|^2 ]
    """
    a, b = squared_overlaps(e, f, g)
    n = a.shape[0]
    # terms[i, k, j]
    terms = a.T[:, :, None] * a[None, :, :] + b.T[:, :, None] * b[None, :, :]
    off_diagonal = ~np.eye(n, dtype=bool)[:, None, :]
    return _probability(np.sum(terms * off_diagonal) / (2 * n))


def p_iter_simplified(e, f, g):
    """Return P_ITER = 1 - 1/(2N) sum_{i,k} [ |<g_k|e_i>|^4 + |<g_k|f_i>|^4 ]."""
    a, b = squared_overlaps(e, f, g)
    n = a.shape[0]
    return _probability(1.0 - np.sum(a ** 2 + b ** 2) / (2 * n))


def p_ic(e, f, g):
    """Return the probability that Bob's index differs from Alice's, whatever bases they used."""
    a, b = squared_overlaps(e, f, g)
    n = a.shape[0]
    ai, bi = a.T[:, :, None], b.T[:, :, None]  # [i, k, .]
    aj, bj = a[None, :, :], b[None, :, :]  # [., k, j]
    terms = ai * aj + bi * bj + ai * bj + bi * aj
    off_diagonal = ~np.eye(n, dtype=bool)[:, None, :]
    return _probability(np.sum(terms * off_diagonal) / (4 * n))


def p_qber(e, f, g):
    """Return the quantum bit error rate among sifted key bits, or None when it is undefined.

    P_QBER = (2N - sum[a^2 + b^2]) / (4N - sum[(a + b)^2])

    The denominator is 4N * P_IC, so None means no index change can ever happen (e == f regime).
    """
    a, b = squared_overlaps(e, f, g)
    n = a.shape[0]
    denominator = 4 * n - np.sum((a + b) ** 2)
    if denominator < QBER_DENOMINATOR_TOLERANCE:
        return None
    return _probability((2 * n - np.sum(a ** 2 + b ** 2)) / denominator)


def p_ic_ideal(e, f):
    """Return the sift rate (key bits per photon) without an eavesdropper.

    Only rounds where Bob picks the other basis can change the index, so this is
    1/(2N) sum_i sum_{j != i} |<f_j|e_i>|^2, which is (N-1)/(2N) for mutually unbiased bases and 0 for e == f.
    """
    e, f = _matrices(e, f)
    n = e.shape[0]
    c = np.abs(f.conj() @ e.T) ** 2
    return _probability(np.sum(c * ~np.eye(n, dtype=bool)) / (2 * n))


def p_iter_n2_analytic(params):
    """Return 1/4 [sin^2(2(phi1 - phi2)) + sin^2(2 phi2)] for the N=2 rotation bases."""
    phi1, phi2 = params.phi1, params.phi2
    return 0.25 * (math.sin(2 * (phi1 - phi2)) ** 2 + math.sin(2 * phi2) ** 2)


def p_iter_n4_alpha(alpha):
    """Return 3/8 [1 + sin^2(2a) / (2 + sin(2a))^2] for Evan's interpolated N=4 basis."""
    s = math.sin(2 * alpha)
    return 0.375 * (1 + s ** 2 / (2 + s) ** 2)


def p_iter_mub_analytic(n):
    """Return (n-1)/(2n), the ITER when Evan measures in one of two mutually unbiased bases."""
    n = check_dimension(n)
    return (n - 1) / (2 * n)


def p_success(n):
    """Return (n-1)/(2n), the mean number of key bits per photon with mutually unbiased bases."""
    n = check_dimension(n)
    return (n - 1) / (2 * n)


def rates_report(e, f, g):
    """Return the ErrorRateReport for the triple. p_success is the eavesdropper-free sift rate of (e, f)."""
    return ErrorRateReport(p_iter=p_iter_simplified(e, f, g), p_qber=p_qber(e, f, g), p_ic=p_ic(e, f, g),
                           p_success=p_ic_ideal(e, f))


def pair_upper_bound(e, f):
    """Return the ITER Evan gets by measuring in e or in f, whichever is lower.

    The minimum ITER over all g can never exceed this, and this never exceeds 1/2.
    """
    return min(p_iter_simplified(e, f, e), p_iter_simplified(e, f, f))


def batch_squared_overlaps(e, f, g_stack):
    """Return (a, b) of shape (B, n, n) for a stack of g basis matrices of shape (B, n, n)."""
    e, f = _matrices(e, f)
    g_stack = np.asarray(g_stack, dtype=complex)
    if g_stack.shape[1:] != e.shape:
        raise DimensionMismatch('Bases have different dimensions {} and {}'.format(e.shape[0], g_stack.shape[-1]))
    g_conj = g_stack.conj()
    return np.abs(g_conj @ e.T) ** 2, np.abs(g_conj @ f.T) ** 2


def batch_p_iter(e, f, g_stack):
    """Return P_ITER for every g in the stack."""
    a, b = batch_squared_overlaps(e, f, g_stack)
    n = a.shape[-1]
    return 1.0 - np.sum(a ** 2 + b ** 2, axis=(1, 2)) / (2 * n)


def batch_p_qber(e, f, g_stack):
    """Return P_QBER for every g in the stack with NaN where it is undefined."""
    a, b = batch_squared_overlaps(e, f, g_stack)
    n = a.shape[-1]
    numerator = 2 * n - np.sum(a ** 2 + b ** 2, axis=(1, 2))
    denominator = 4 * n - np.sum((a + b) ** 2, axis=(1, 2))
    defined = denominator >= QBER_DENOMINATOR_TOLERANCE
    return np.where(defined, numerator / np.where(defined, denominator, 1.0), np.nan)
