#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试 matrix_rep 模块
占据数基矢上的矩阵表示、精确对角化、方差与平均场态判据
"""

import sys

import numpy as np
import pytest

from builder import orbital_fixtures, build_class_k
from errors import ConstraintError, DimensionCapError, UsageError
from matrix_rep import (basis_vector, csa_index, csa_label, exact_eigensystem, expectation,
                        mf_state_check, operator_norm, particle_numbers, to_matrix, variance)
from operators import (FERMIONIC, MAJORANA, PAULI, OperatorPolynomial, annihilation, commutator, creation,
                       fermionic_from_majorana, jordan_wigner, majorana, multiply, number, pauli,
                       random_polynomial)


def test_number_operator_is_diagonal():
    """模式1为最低位"""
    assert np.allclose(to_matrix(number(1, 2)).matrix, np.diag([0, 1, 0, 1]))
    assert np.allclose(to_matrix(number(2, 2)).matrix, np.diag([0, 0, 1, 1]))


def test_pauli_matrices():
    z = to_matrix(pauli('z', 1, 1)).matrix
    y = to_matrix(pauli('y', 1, 1)).matrix
    assert np.allclose(z, np.diag([1, -1]))
    # y|0⟩ = i|1⟩
    assert np.allclose(y, np.array([[0, -1j], [1j, 0]]))


def test_creation_matrices_anticommute():
    a1 = to_matrix(annihilation(1, 3)).matrix
    a2_dag = to_matrix(creation(2, 3)).matrix
    a3 = to_matrix(annihilation(3, 3)).matrix
    assert np.allclose(a1 @ a2_dag + a2_dag @ a1, 0)
    assert np.allclose(a3 @ a3.conj().T + a3.conj().T @ a3, np.eye(8))


def test_jordan_wigner_matrices_agree():
    """Jordan-Wigner 像与费米子算符在同一基矢下矩阵相同"""
    rng = np.random.default_rng(13)
    for _ in range(100):
        poly = random_polynomial(FERMIONIC, 3, rng, n_terms=3, max_degree=4)
        assert np.allclose(to_matrix(poly).matrix, to_matrix(jordan_wigner(poly)).matrix)


def test_majorana_matrix_matches_fermionic():
    poly = multiply(majorana(1, 2), majorana(4, 2)) * 0.5
    assert np.allclose(to_matrix(poly).matrix, to_matrix(fermionic_from_majorana(poly)).matrix)


@pytest.mark.parametrize("family", [FERMIONIC, MAJORANA, PAULI])
def test_multiplication_matches_matrix_product(family):
    """乘积与对易子的矩阵等于矩阵的乘积与对易子"""
    rng = np.random.default_rng(17)
    for _ in range(200):
        p = random_polynomial(family, 3, rng, n_terms=3, max_degree=3)
        q = random_polynomial(family, 3, rng, n_terms=3, max_degree=3)
        mp, mq = to_matrix(p, 3).matrix, to_matrix(q, 3).matrix
        assert np.allclose(to_matrix(multiply(p, q), 3).matrix, mp @ mq)
        assert np.allclose(to_matrix(commutator(p, q), 3).matrix, mp @ mq - mq @ mp)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_canonical_anticommutation_matrices(n):
    """{a_p, a_q†} = δ_pq，{a_p, a_q} = 0"""
    dim = 2 ** n
    lowering = [to_matrix(annihilation(p, n)).matrix for p in range(1, n + 1)]
    for p, a in enumerate(lowering):
        for q, b in enumerate(lowering):
            mixed = a @ b.conj().T + b.conj().T @ a
            assert np.allclose(mixed, np.eye(dim) if p == q else np.zeros((dim, dim)), atol=1e-10)
            assert np.allclose(a @ b + b @ a, 0, atol=1e-10)


def test_index_above_declared_modes():
    with pytest.raises(UsageError):
        to_matrix(number(3, 3), n_modes=2)


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        to_matrix(number(15, 15))


def test_particle_numbers():
    assert particle_numbers(2).tolist() == [0, 1, 1, 2]


def test_csa_labels():
    assert csa_label(5, FERMIONIC, 3) == (1, 0, 1)
    assert csa_label(5, PAULI, 3) == (-1, 1, -1)
    assert csa_index((-1, 1, -1), PAULI) == 5
    assert csa_index((0, 1, 1), FERMIONIC) == 6


def test_class1_spectrum():
    """第1类算例的谱等于 F 在全部占据数上的取值"""
    fixture = orbital_fixtures()['class1']
    system = exact_eigensystem(to_matrix(build_class_k(fixture.spec)))
    assert np.allclose(system.values, sorted([0, 0, 0, 0, -27, -9, -9, -45]), atol=1e-8)
    assert system.norm == pytest.approx(45.0)
    assert any(len(group) == 4 for group in system.groups)


def test_eigensystem_rejects_non_hermitian():
    with pytest.raises(ConstraintError):
        exact_eigensystem(to_matrix(creation(1, 1)))


def test_operator_norm():
    H = pauli('z', 1, 2) * 2.0 + pauli('x', 2, 2) * 0.5
    assert operator_norm(to_matrix(H)) == pytest.approx(2.5)


def test_variance_of_eigenstate_is_zero():
    H = to_matrix(number(1, 2) * 3.0 + number(2, 2))
    state = basis_vector(3, 4)
    assert expectation(H, state) == pytest.approx(4.0)
    assert variance(H, state) == pytest.approx(0.0, abs=1e-14)


def test_variance_of_superposition():
    H = to_matrix(pauli('z', 1, 1))
    state = np.array([1, 1]) / np.sqrt(2)
    assert variance(H, state) == pytest.approx(1.0)


def test_unnormalized_state_raises():
    H = to_matrix(pauli('z', 1, 1))
    with pytest.raises(ConstraintError):
        variance(H, np.array([1.0, 1.0]))
    assert variance(H, np.array([1.0, 1.0]), normalize=True) == pytest.approx(1.0)


def test_slater_determinant_check():
    assert mf_state_check(basis_vector(3, 16), FERMIONIC, 4).is_mf
    entangled = (basis_vector(3, 16) + basis_vector(12, 16)) / np.sqrt(2)
    check = mf_state_check(entangled, FERMIONIC, 4)
    assert check.criterion == 'slater'
    assert not check.is_mf
    assert check.error == pytest.approx(0.5)


def test_quasiparticle_vacuum_check():
    """(|00⟩ + |11⟩)/√2 不定粒子数，但仍是 Bogoliubov 真空"""
    state = (basis_vector(0, 4) + basis_vector(3, 4)) / np.sqrt(2)
    check = mf_state_check(state, FERMIONIC, 2)
    assert check.criterion == 'generalized'
    assert check.is_mf


def test_product_state_check():
    plus = np.array([1, 1]) / np.sqrt(2)
    product = np.kron(plus, np.array([1, 0]))
    assert mf_state_check(product, PAULI, 2).is_mf
    bell = (basis_vector(0, 4) + basis_vector(3, 4)) / np.sqrt(2)
    check = mf_state_check(bell, PAULI, 2)
    assert check.criterion == 'purity'
    assert not check.is_mf
    assert check.error == pytest.approx(0.5)


def test_zero_polynomial_matrix():
    assert np.allclose(to_matrix(OperatorPolynomial.zero(MAJORANA, 2)).matrix, 0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
