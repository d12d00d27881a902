"""Bases used by Alice, Bob and Evan.

A basis is stored as an (n, n) complex matrix whose rows are the basis vectors, so row i holds the components
e_{i1}, ..., e_{in} of |e_i>. Every type here is immutable after construction.
"""
import math
from collections import namedtuple

import numpy as np

from .rng import as_generator, BASIS_KEY


__all__ = ['MAX_DIMENSION', 'TOLERANCE', 'EXACT_TOLERANCE', 'LABELS',
           'BasisError', 'DimensionMismatch', 'Diagnostic',
           'ComplexVector', 'Basis', 'BasisPair', 'AngleParams',
           'check_dimension', 'inner_product', 'validate_basis',
           'computational_basis', 'fourier_mub_basis', 'rotation_basis_2d', 'hadamard_mub_4',
           'interpolated_g_basis', 'random_haar_basis', 'random_haar_bases',
           'rotation_pair_2d', 'fourier_mub_pair', 'mutual_unbiasedness', 'are_mutually_unbiased']


MAX_DIMENSION = 64
TOLERANCE = 1e-9
EXACT_TOLERANCE = 1e-12
LABELS = ('E', 'F', 'G')
TWO_PI = 2 * math.pi


class BasisError(ValueError):
    """A vector or basis violates one of its invariants."""
    pass


class DimensionMismatch(BasisError):
    """Two operands do not live in the same state space."""
    pass


Diagnostic = namedtuple('Diagnostic', ['i', 'j', 'residual'])
Diagnostic.__doc__ = """Offending pair found by validate_basis. i == j is a normalization residual |<v_i|v_i> - 1|."""


def check_dimension(n):
    """Return n as an int or raise BasisError if it is not in [2, MAX_DIMENSION]."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise BasisError('Dimension must be an integer, got {!r}'.format(n))
    n = int(n)
    if n < 2:
        raise BasisError('Dimension must be at least 2, got {}'.format(n))
    if n > MAX_DIMENSION:
        raise BasisError('Dimension {} exceeds the maximum of {}'.format(n, MAX_DIMENSION))
    return n


class ComplexVector(object):
    """Pure state given by n complex amplitudes."""
    __slots__ = ('_amplitudes',)

    def __init__(self, amplitudes, validate=True):
        arr = np.array(amplitudes, dtype=complex)
        if arr.ndim != 1:
            raise BasisError('A vector needs a flat sequence of amplitudes, got shape {}'.format(arr.shape))
        check_dimension(len(arr))
        if not np.all(np.isfinite(arr)):
            raise BasisError('Vector amplitudes must be finite')
        if validate:
            norm = float(np.vdot(arr, arr).real)
            if abs(norm - 1.0) > TOLERANCE:
                raise BasisError('Vector is not normalized: squared norm {!r}'.format(norm))
        arr.setflags(write=False)
        self._amplitudes = arr

    @property
    def amplitudes(self):
        return self._amplitudes

    @property
    def n(self):
        return len(self._amplitudes)

    def __len__(self):
        return len(self._amplitudes)

    def __iter__(self):
        return iter(self._amplitudes)

    def __getitem__(self, item):
        return self._amplitudes[item]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._amplitudes
        return self._amplitudes.astype(dtype)

    def __repr__(self):
        return '{}({})'.format(self.__class__.__name__, np.array2string(self._amplitudes, precision=6))


class Basis(object):
    """Ordered set of n orthonormal vectors with an E, F or G label.

    The label is metadata only. Nothing branches on it.
    """
    __slots__ = ('_matrix', '_label')

    def __init__(self, vectors, label='E', validate=True):
        """Initialize the basis.

        Args:
            vectors (sequence/np.ndarray): n vectors of n amplitudes each, or an (n, n) matrix with one vector per row.
            label (str)['E']: One of 'E', 'F', 'G'.
            validate (bool)[True]: If True raise BasisError when the vectors are not orthonormal.
        """
        if label not in LABELS:
            raise BasisError('Basis label must be one of {}, got {!r}'.format(LABELS, label))
        matrix = np.array([np.asarray(v, dtype=complex) for v in vectors], dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise BasisError('A basis needs n vectors of dimension n, got shape {}'.format(matrix.shape))
        check_dimension(matrix.shape[0])
        if not np.all(np.isfinite(matrix)):
            raise BasisError('Basis amplitudes must be finite')
        matrix.setflags(write=False)
        self._matrix = matrix
        self._label = label

        if validate:
            ok, diagnostics = validate_basis(self)
            if not ok:
                raise BasisError('Vectors do not form an orthonormal basis: {}'.format(
                    ', '.join('({}, {}) residual {:.3g}'.format(*d) for d in diagnostics[:5])))

    @classmethod
    def from_matrix(cls, matrix, label='E', validate=False):
        """Return a basis from a matrix whose rows are the basis vectors."""
        return cls(matrix, label=label, validate=validate)

    @property
    def matrix(self):
        """Read-only (n, n) matrix, one basis vector per row."""
        return self._matrix

    @property
    def label(self):
        return self._label

    @property
    def n(self):
        return self._matrix.shape[0]

    @property
    def vectors(self):
        return tuple(ComplexVector(row, validate=False) for row in self._matrix)

    def relabel(self, label):
        """Return the same vectors under another label."""
        return self.__class__(self._matrix, label=label, validate=False)

    def overlaps(self, other):
        """Return the matrix O[k, i] = <self_k|other_i>."""
        other = getattr(other, 'matrix', other)
        if np.shape(other) != self._matrix.shape:
            raise DimensionMismatch('Cannot overlap bases of dimension {} and {}'.format(self.n, np.shape(other)[0]))
        return self._matrix.conj() @ np.asarray(other).T

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, item):
        return ComplexVector(self._matrix[item], validate=False)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._matrix
        return self._matrix.astype(dtype)

    def __repr__(self):
        return '{}(n={}, label={!r})'.format(self.__class__.__name__, self.n, self._label)


class BasisPair(object):
    """Alice and Bob's bases e (encodes "0") and f (encodes "1")."""
    __slots__ = ('_e', '_f')

    def __init__(self, e, f):
        if e.n != f.n:
            raise DimensionMismatch('Bases e and f have different dimensions {} and {}'.format(e.n, f.n))
        self._e = e
        self._f = f

    @property
    def e(self):
        return self._e

    @property
    def f(self):
        return self._f

    @property
    def n(self):
        return self._e.n

    def __iter__(self):
        yield self._e
        yield self._f

    def __getitem__(self, item):
        return (self._e, self._f)[item]

    def __repr__(self):
        return '{}(n={})'.format(self.__class__.__name__, self.n)


def _canonical_angle(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise BasisError('Angle {} must be finite, got {!r}'.format(name, value))
    value = value % TWO_PI
    if value >= TWO_PI:
        value = 0.0
    return value


class AngleParams(object):
    """Angles phi1 (Alice/Bob's N=2 basis), phi2 (Evan's N=2 basis) and alpha (Evan's N=4 family).

    All angles are kept in [0, 2*pi).
    """
    __slots__ = ('_phi1', '_phi2', '_alpha')

    def __init__(self, phi1=0.0, phi2=0.0, alpha=0.0):
        self._phi1 = _canonical_angle(phi1, 'phi1')
        self._phi2 = _canonical_angle(phi2, 'phi2')
        self._alpha = _canonical_angle(alpha, 'alpha')

    phi1 = property(lambda self: self._phi1)
    phi2 = property(lambda self: self._phi2)
    alpha = property(lambda self: self._alpha)

    def as_dict(self):
        return {'phi1': self._phi1, 'phi2': self._phi2, 'alpha': self._alpha}

    def __repr__(self):
        return '{}(phi1={!r}, phi2={!r}, alpha={!r})'.format(self.__class__.__name__, self._phi1, self._phi2,
                                                             self._alpha)


def inner_product(a, b):
    """Return <a|b> = sum(conj(a_j) * b_j)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch('Cannot take the inner product of vectors of dimension {} and {}'.format(
            a.shape[0] if a.ndim else 0, b.shape[0] if b.ndim else 0))
    return complex(np.vdot(a, b))


def validate_basis(b, tol=TOLERANCE):
    """Check normalization and pairwise orthogonality of all vectors.

    Args:
        b (Basis): Basis to check. May have been built with validate=False.
        tol (float)[1e-9]: Tolerance on every residual.

    Returns:
        ok (bool): True if every residual is within tol.
        diagnostics (list): Diagnostic(i, j, residual) for every offending pair, i <= j.
    """
    matrix = np.asarray(getattr(b, 'matrix', b), dtype=complex)
    gram = matrix.conj() @ matrix.T
    residuals = np.abs(gram - np.eye(matrix.shape[0]))
    residuals[~np.isfinite(residuals)] = np.inf
    bad = np.argwhere(np.triu(residuals > tol))
    diagnostics = [Diagnostic(int(i), int(j), float(residuals[i, j])) for i, j in bad]
    return not diagnostics, diagnostics


def computational_basis(n, label='E'):
    """Return the basis e_ij = delta_ij."""
    n = check_dimension(n)
    return Basis.from_matrix(np.eye(n, dtype=complex), label=label)


def fourier_mub_basis(n, label='F'):
    """Return the Fourier basis f_ij = omega^((i-1)(j-1)) / sqrt(n) with omega = exp(2 pi i / n).

    It is mutually unbiased with computational_basis(n).
    """
    n = check_dimension(n)
    idx = np.arange(n)
    powers = np.outer(idx, idx) % n  # Reduce the exponent first to keep the phases exact
    return Basis.from_matrix(np.exp(2j * np.pi * powers / n) / math.sqrt(n), label=label)


def rotation_basis_2d(phi, label='F'):
    """Return the real N=2 basis {(cos phi, sin phi), (-sin phi, cos phi)}."""
    c, s = math.cos(phi), math.sin(phi)
    return Basis.from_matrix(np.array([[c, s], [-s, c]], dtype=complex), label=label)


def hadamard_mub_4():
    """Return the real N=4 pair: computational e and the four sign-pattern vectors of f.

    The index order of f puts the 1/2 component of |f_i> at position i, which is what makes the
    interpolated g-family orthonormal.
    """
    f = 0.5 * np.array([[1, 1, -1, -1],
                        [-1, 1, 1, -1],
                        [1, -1, 1, -1],
                        [1, 1, 1, 1]], dtype=complex)
    return BasisPair(computational_basis(4), Basis.from_matrix(f, label='F'))


def interpolated_g_basis(pair, alpha):
    """Return Evan's basis on the line between the closest states of e and f.

    |g_i> = (cos a |e_i> + sin a |f_i>) / (1 + sin(2a) / 2)^(1/2)

    Args:
        pair (BasisPair): The hadamard_mub_4() pair. Other pairs generally do not give an orthonormal g.
        alpha (float): Interpolation angle in radians.

    Raises:
        BasisError: If the normalization vanishes or the result is not an orthonormal basis.
    """
    denominator = 1 + 0.5 * math.sin(2 * alpha)
    if denominator <= EXACT_TOLERANCE:
        raise BasisError('Normalization of the interpolated basis vanishes at alpha={!r}'.format(alpha))
    matrix = (math.cos(alpha) * pair.e.matrix + math.sin(alpha) * pair.f.matrix) / math.sqrt(denominator)
    g = Basis.from_matrix(matrix, label='G')
    ok, diagnostics = validate_basis(g)
    if not ok:
        raise BasisError('Interpolated vectors are not orthonormal for this pair (index alignment required): '
                         '{}'.format(diagnostics[:3]))
    return g


def random_haar_bases(n, count, rng):
    """Return count Haar-random basis matrices of shape (count, n, n), one vector per row.

    Each sample consumes 2 * n * n standard normals from rng in order, so the first m samples of a stream are
    the same whether count is m or larger.
    """
    n = check_dimension(n)
    if count <= 0:
        return np.empty((0, n, n), dtype=complex)
    z = rng.standard_normal((count, n, n, 2))
    z = (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2)
    q, r = np.linalg.qr(z)

    # Fix the phase freedom of QR so the columns are Haar distributed
    d = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(d)
    phase = np.where(mag > 0, d / np.where(mag > 0, mag, 1), 1)
    q = q * phase[..., None, :]
    return np.swapaxes(q, -1, -2)


def random_haar_basis(n, rng_state, label='G'):
    """Return one basis drawn from the unitarily invariant (Haar) measure.

    Args:
        n (int): Dimension.
        rng_state (np.random.Generator/int): Generator to draw from, or a seed.
        label (str)['G']: Basis label.
    """
    rng = as_generator(rng_state, BASIS_KEY)
    return Basis.from_matrix(random_haar_bases(n, 1, rng)[0], label=label)


def rotation_pair_2d(phi1):
    """Return the N=2 pair: computational e and f = rotation_basis_2d(phi1)."""
    return BasisPair(computational_basis(2), rotation_basis_2d(phi1, label='F'))


def fourier_mub_pair(n):
    """Return the computational/Fourier mutually unbiased pair."""
    return BasisPair(computational_basis(n), fourier_mub_basis(n))


def mutual_unbiasedness(e, f):
    """Return max | |<e_i|f_j>|^2 - 1/n |, zero for mutually unbiased bases."""
    return float(np.max(np.abs(np.abs(e.overlaps(f)) ** 2 - 1.0 / e.n)))


def are_mutually_unbiased(e, f, tol=TOLERANCE):
    return mutual_unbiasedness(e, f) < tol
