import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from mubqkd import (AngleParams, Basis, BasisError, ComplexVector, DimensionMismatch, are_mutually_unbiased,
                    computational_basis, fourier_mub_basis, fourier_mub_pair, generator, hadamard_mub_4,
                    inner_product, interpolated_g_basis, mutual_unbiasedness, random_haar_bases, random_haar_basis,
                    rotation_basis_2d, rotation_pair_2d, validate_basis)


ANGLES = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize('n', [1, 65, 0, -3])
def test_dimension_range(n):
    with pytest.raises(BasisError):
        computational_basis(n)


def test_dimension_type():
    with pytest.raises(BasisError):
        computational_basis(2.5)
    with pytest.raises(BasisError):
        computational_basis(True)


def test_vector():
    v = ComplexVector([1 / math.sqrt(2), 1j / math.sqrt(2)])
    assert v.n == 2
    assert_allclose(np.asarray(v), [1 / math.sqrt(2), 1j / math.sqrt(2)])

    with pytest.raises(BasisError):
        ComplexVector([1, 1])
    assert ComplexVector([1, 1], validate=False).n == 2
    with pytest.raises(BasisError):
        ComplexVector([1])
    with pytest.raises(BasisError):
        ComplexVector([1, float('nan')], validate=False)


def test_inner_product():
    assert inner_product([1j, 0], [1j, 0]) == 1
    assert inner_product([1j, 0], [1, 0]) == -1j
    with pytest.raises(DimensionMismatch):
        inner_product([1, 0], [1, 0, 0])


def test_basis_validation():
    with pytest.raises(BasisError):
        Basis([[1, 0], [1, 0]])

    b = Basis([[1, 0], [1, 0]], validate=False)
    ok, diagnostics = validate_basis(b)
    assert not ok
    assert [(d.i, d.j) for d in diagnostics] == [(0, 1)]
    assert diagnostics[0].residual == pytest.approx(1.0)

    with pytest.raises(BasisError):
        Basis([[1, 0], [0, 1]], label='X')
    with pytest.raises(BasisError):
        Basis([[1, 0, 0], [0, 1, 0]])


def test_basis_is_read_only():
    e = computational_basis(3)
    assert not e.matrix.flags.writeable
    with pytest.raises(ValueError):
        e.matrix[0, 0] = 2
    assert e.relabel('G').label == 'G'
    assert e.label == 'E'


def test_overlaps():
    e = computational_basis(3)
    f = fourier_mub_basis(3)
    o = e.overlaps(f)
    assert o.shape == (3, 3)
    assert_allclose(o[1, 2], f.matrix[2, 1])
    with pytest.raises(DimensionMismatch):
        e.overlaps(computational_basis(2))


@pytest.mark.parametrize('n', range(2, 9))
def test_fourier_is_mutually_unbiased(n):
    e, f = fourier_mub_pair(n)
    assert validate_basis(f, tol=1e-12)[0]
    assert are_mutually_unbiased(e, f)
    assert mutual_unbiasedness(e, f) < 1e-12
    assert not are_mutually_unbiased(e, e)


def test_hadamard_pair(hadamard4):
    e, f = hadamard4
    assert validate_basis(f, tol=1e-12)[0]
    assert are_mutually_unbiased(e, f)
    assert np.all(np.isreal(f.matrix))
    # The 1/2 component of f_i sits at position i
    assert_allclose(np.diagonal(f.matrix), 0.5)


@settings(max_examples=50, deadline=None)
@given(alpha=ANGLES)
def test_interpolated_family_is_orthonormal(alpha):
    g = interpolated_g_basis(hadamard_mub_4(), alpha)
    assert g.label == 'G'
    assert validate_basis(g, tol=1e-12)[0]


def test_interpolated_family_needs_aligned_pair():
    with pytest.raises(BasisError):
        interpolated_g_basis(fourier_mub_pair(4), math.pi / 4)


def test_interpolated_family_endpoints(hadamard4):
    assert_allclose(interpolated_g_basis(hadamard4, 0).matrix, hadamard4.e.matrix, atol=1e-15)
    assert_allclose(interpolated_g_basis(hadamard4, math.pi / 2).matrix, hadamard4.f.matrix, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(phi=ANGLES)
def test_rotation_basis(phi):
    b = rotation_basis_2d(phi)
    assert validate_basis(b, tol=1e-12)[0]


def test_rotation_pair():
    pair = rotation_pair_2d(math.pi / 4)
    assert are_mutually_unbiased(pair.e, pair.f)
    assert not are_mutually_unbiased(*rotation_pair_2d(0.1))


def test_angle_params():
    params = AngleParams(phi1=-math.pi / 2, phi2=2 * math.pi, alpha=5 * math.pi)
    assert params.phi1 == pytest.approx(3 * math.pi / 2)
    assert params.phi2 == 0.0
    assert params.alpha == pytest.approx(math.pi)
    with pytest.raises(BasisError):
        AngleParams(alpha=float('inf'))


@pytest.mark.parametrize('n', [2, 3, 5, 8])
def test_haar_bases_are_orthonormal(n):
    stack = random_haar_bases(n, 20, generator(3, 99))
    assert stack.shape == (20, n, n)
    for matrix in stack:
        assert validate_basis(matrix)[0]


def test_haar_prefix():
    short = random_haar_bases(4, 3, generator(11, 99))
    long = random_haar_bases(4, 10, generator(11, 99))
    assert_allclose(long[:3], short, atol=1e-13)

    assert random_haar_bases(4, 0, generator(11, 99)).shape == (0, 4, 4)


def test_haar_seeded():
    a = random_haar_basis(3, 5)
    b = random_haar_basis(3, 5)
    c = random_haar_basis(3, 6)
    assert_array_equal(a.matrix, b.matrix)
    assert not np.allclose(a.matrix, c.matrix)


def test_haar_is_unbiased_on_average():
    # E|<g_k|e_i>|^2 = 1/n for Haar-random g
    stack = random_haar_bases(4, 10000, generator(1, 99))
    mean = np.mean(np.abs(stack) ** 2, axis=0)
    assert_allclose(mean, 1 / 4, atol=0.01)


if __name__ == '__main__':
    test_dimension_type()
    test_vector()
    test_inner_product()
    test_basis_validation()
    test_basis_is_read_only()
    test_overlaps()
    test_rotation_pair()
    test_angle_params()
    test_haar_prefix()
    test_haar_seeded()
    test_haar_is_unbiased_on_average()
