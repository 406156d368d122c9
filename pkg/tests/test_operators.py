"""Operator correctness: adjoints, orthonormality, spectra, validation."""

import numpy as np
import pytest
import scipy.linalg

from adl1.errors import DimensionMismatchError
from adl1.operators import (
    AugmentedOperator,
    DenseOperator,
    PartialDCTOperator,
    PartialWalshHadamardOperator,
    as_complex_vector,
    build_augmented,
    estimate_lambda_max,
    fwht,
    make_partial_dct,
    make_partial_wht,
    orthonormal_gaussian_operator,
)

from oracles import materialize


def _complex(rng, size):
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def _operator_zoo(rng):
    ops = [
        DenseOperator(_complex(rng, (7, 15))),
        DenseOperator(rng.standard_normal((4, 9))),
        make_partial_wht(64, 20, rng),
        make_partial_dct(50, 17, rng),
        orthonormal_gaussian_operator(6, 14, rng),
    ]
    ops.append(AugmentedOperator(ops[2], 0.7))
    ops.append(AugmentedOperator(ops[0], 1.3))
    return ops


def test_adjoint_pairing_holds_for_every_kind(rng):
    # <A u, v> must equal <u, A* v> in the complex inner product.
    for op in _operator_zoo(rng):
        scale = max(1.0, op.lambda_max() if op.orthonormal_rows else 1.0)
        for _ in range(100):
            u = _complex(rng, op.n)
            v = _complex(rng, op.m)
            lhs = np.vdot(v, op.apply(u))
            rhs = np.vdot(op.adjoint(v), u)
            bound = 1e-10 * scale * np.linalg.norm(u) * np.linalg.norm(v)
            assert abs(lhs - rhs) <= bound, op.kind


def test_orthonormal_rows_flag_is_truthful(rng):
    for op in _operator_zoo(rng):
        y = _complex(rng, op.m)
        err = np.linalg.norm(op.apply(op.adjoint(y)) - y) / np.linalg.norm(y)
        if op.orthonormal_rows:
            assert err < 1e-12, op.kind
        else:
            assert err > 1e-6, op.kind


def test_fwht_matches_sylvester_matrix(rng):
    n = 16
    h = scipy.linalg.hadamard(n)
    x = _complex(rng, n)
    assert np.allclose(fwht(x), h @ x, atol=1e-12 * n)


def test_fwht_basis_and_involution(rng):
    # H e_0 is the all-ones row; H(Hx) = n x.
    n = 32
    e0 = np.zeros(n, dtype=np.complex128)
    e0[0] = 1.0
    assert np.array_equal(fwht(e0), np.ones(n, dtype=np.complex128))
    x = _complex(rng, n)
    assert np.allclose(fwht(fwht(x)), n * x, atol=1e-10)


@pytest.mark.parametrize("factory,n", [(make_partial_wht, 32), (make_partial_dct, 45)])
def test_partial_transform_matches_materialized_matrix(factory, n, rng):
    op = factory(n, 12, rng)
    mat = materialize(op)
    x = _complex(rng, n)
    y = _complex(rng, op.m)
    assert np.allclose(op.apply(x), mat @ x, atol=1e-12)
    assert np.allclose(op.adjoint(y), mat.conj().T @ y, atol=1e-12)
    gram = mat @ mat.conj().T
    assert np.allclose(gram, np.eye(op.m), atol=1e-12)


def test_wht_rejects_non_power_of_two(rng):
    with pytest.raises(ValueError):
        make_partial_wht(48, 10, rng)
    with pytest.raises(ValueError):
        PartialWalshHadamardOperator(24, [0, 1], np.ones(24))


def test_partial_operator_argument_validation():
    signs = np.ones(16)
    with pytest.raises(ValueError):
        PartialWalshHadamardOperator(16, [], signs)
    with pytest.raises(ValueError):
        PartialWalshHadamardOperator(16, [3, 3], signs)
    with pytest.raises(ValueError):
        PartialWalshHadamardOperator(16, [0, 16], signs)
    with pytest.raises(ValueError):
        PartialDCTOperator(10, [0, 1], np.ones(10) * 2.0)
    with pytest.raises(ValueError):
        PartialDCTOperator(10, [0, 1], np.ones(9))


def test_dense_orthonormal_claim_is_probed(rng):
    a = rng.standard_normal((3, 8))
    with pytest.raises(ValueError):
        DenseOperator(a, orthonormal_rows=True)
    q = scipy.linalg.qr(a.T, mode="economic")[0].T
    DenseOperator(q, orthonormal_rows=True)  # must not raise


def test_lambda_max_is_one_for_orthonormal_rows(rng):
    op = make_partial_wht(64, 20, rng)
    assert op.lambda_max() == 1.0


def test_lambda_max_on_known_diagonal_operator():
    op = DenseOperator(np.array([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    est = estimate_lambda_max(op, tol=1e-12, max_iter=500)
    assert abs(est.lambda_max - 4.0) < 1e-8
    assert est.iterations >= 1
    assert abs(op.lambda_max() - 4.0) < 1e-4


def test_lambda_max_matches_dense_eigensolver(rng):
    a = _complex(rng, (20, 50))
    op = DenseOperator(a)
    exact = float(np.linalg.eigvalsh(a.conj().T @ a)[-1])
    est = estimate_lambda_max(op, tol=1e-12, max_iter=5000)
    assert abs(est.lambda_max - exact) < 1e-6 * exact


def test_lambda_max_is_memoized(rng):
    op = DenseOperator(_complex(rng, (5, 11)))
    first = op.lambda_max()
    assert op.lambda_max() == first
    assert op._lambda_max_cache == first


def test_augmented_operator_block_structure(rng):
    base = DenseOperator(_complex(rng, (4, 6)))
    nu = 0.7
    op = build_augmented(base, nu)
    assert op.shape == (4, 10)
    mat = materialize(op)
    expected = np.hstack([base.matrix, nu * np.eye(4)]) / np.sqrt(1 + nu * nu)
    assert np.allclose(mat, expected, atol=1e-14)
    # Zero signal block: the forward map reduces to the scaled tail.
    r = _complex(rng, 4)
    x = np.concatenate([np.zeros(6, dtype=np.complex128), r])
    assert np.allclose(op.apply(x), nu * r / np.sqrt(1 + nu * nu), atol=1e-14)


def test_augmented_operator_keeps_orthonormal_rows(rng):
    base = make_partial_dct(40, 13, rng)
    op = AugmentedOperator(base, 2.5)
    assert op.orthonormal_rows
    y = _complex(rng, op.m)
    assert np.allclose(op.apply(op.adjoint(y)), y, atol=1e-12)


def test_augmented_operator_validation(rng):
    base = DenseOperator(_complex(rng, (3, 5)))
    with pytest.raises(ValueError):
        AugmentedOperator(base, 0.0)
    with pytest.raises(ValueError):
        AugmentedOperator(base, -1.0)
    with pytest.raises(TypeError):
        AugmentedOperator(np.eye(3), 1.0)


def test_as_complex_vector_validation():
    v = as_complex_vector([1.0, 2.0], 2)
    assert v.dtype == np.complex128
    with pytest.raises(DimensionMismatchError):
        as_complex_vector(np.ones((2, 2)))
    with pytest.raises(DimensionMismatchError):
        as_complex_vector(np.ones(3), 4)
    with pytest.raises(ValueError):
        as_complex_vector(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        as_complex_vector(np.array([1.0, np.inf * 1j]))


def test_apply_rejects_wrong_length(rng):
    op = make_partial_wht(32, 8, rng)
    with pytest.raises(DimensionMismatchError):
        op.apply(np.ones(31))
    with pytest.raises(DimensionMismatchError):
        op.adjoint(np.ones(9))


def test_factory_shapes_and_determinism():
    op1 = make_partial_wht(64, 24, np.random.default_rng(5))
    op2 = make_partial_wht(64, 24, np.random.default_rng(5))
    assert op1.shape == (24, 64)
    assert np.array_equal(op1.rows, op2.rows)
    assert np.array_equal(op1.signs, op2.signs)
    g1 = orthonormal_gaussian_operator(6, 15, np.random.default_rng(7))
    assert g1.shape == (6, 15)
    assert g1.orthonormal_rows
