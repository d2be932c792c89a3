#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试 mf_group 模块
平均场转动的矩阵与伴随作用、轨道/单比特转动、Bogoliubov 变换与极大环面对角化
"""

import sys

import numpy as np
import pytest

from errors import ConstraintError, UsageError
from lie_algebra import qubit_basis, so_even_basis, u_basis
from matrix_rep import to_matrix
from mf_group import (BogoliubovTransform, MFRotation, apply_rotation, bogoliubov_from_quadratic,
                      bogoliubov_generators, maximal_tori_diagonalize, orbital_rotation, qmf_rotation,
                      quadratic_hamiltonian, reorder_rotation, rotation_matrix)
from operators import (FERMIONIC, MAJORANA, annihilation, creation, excitation, identity, majorana, multiply,
                       number, pauli, random_polynomial)


def _random_rotation(basis, rng, scale=1.0):
    return MFRotation(basis, tuple((k, float(rng.normal() * scale)) for k in range(basis.dimension)))


def test_bloch_rotation_of_z():
    """e^{−θ/2·iy} z e^{θ/2·iy} = cos θ z + sin θ x"""
    theta = 0.7
    rotation = MFRotation.from_labels(qubit_basis(1), [("iy[1]", theta / 2)])
    image = apply_rotation(rotation, pauli('z', 1, 1))
    expected = pauli('z', 1, 1) * np.cos(theta) + pauli('x', 1, 1) * np.sin(theta)
    assert image.allclose(expected, 1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_adjoint_action_matches_matrices(seed):
    """代数外的二体算符走 Krylov 路径，结果与 U†PU 一致且次数不增"""
    rng = np.random.default_rng(seed)
    basis = u_basis(3)
    rotation = _random_rotation(basis, rng)
    p = multiply(number(1, 3), number(2, 3)) + excitation(3, 1, 3) * 0.5 + excitation(1, 3, 3) * 0.5
    image = apply_rotation(rotation, p)
    unitary = rotation_matrix(rotation).matrix
    assert np.allclose(to_matrix(image).matrix, unitary.conj().T @ to_matrix(p).matrix @ unitary)
    assert image.degree() <= p.degree()


def test_adjoint_action_on_algebra_element():
    rng = np.random.default_rng(4)
    basis = so_even_basis(2)
    rotation = _random_rotation(basis, rng)
    element = basis.element(rng.normal(size=basis.dimension))
    image = apply_rotation(rotation, element)
    unitary = rotation_matrix(rotation).matrix
    assert np.allclose(to_matrix(image).matrix, unitary.conj().T @ to_matrix(element).matrix @ unitary)


def test_inverse_undoes_rotation():
    rng = np.random.default_rng(8)
    basis = qubit_basis(2)
    rotation = _random_rotation(basis, rng)
    p = random_polynomial('pauli', 2, rng, hermitian=True)
    assert apply_rotation(rotation.inverse(), apply_rotation(rotation, p)).allclose(p, 1e-9)
    product = rotation_matrix(rotation.compose(rotation.inverse())).matrix
    assert np.allclose(product, np.eye(4))


def test_rotation_family_mismatch():
    rotation = MFRotation.from_labels(qubit_basis(1), [("ix[1]", 0.1)])
    with pytest.raises(ConstraintError):
        apply_rotation(rotation, number(1, 1))


def test_rotation_serialization():
    basis = u_basis(2)
    rotation = MFRotation.from_labels(basis, [("kappa[1,2]", 0.3), ("iE[2,2]", -1.2)])
    restored = MFRotation.from_dict(rotation.to_dict())
    assert restored.factors == rotation.factors
    with pytest.raises(UsageError):
        MFRotation.from_labels(basis, [("kappa[1,3]", 0.1)])


def test_orbital_swap():
    """θ_12 = π 交换轨道 1 与 2"""
    rotation = orbital_rotation({"12": np.pi}, n_modes=2)
    assert apply_rotation(rotation, number(1, 2)).allclose(number(2, 2), 1e-10)
    assert apply_rotation(rotation, number(2, 2)).allclose(number(1, 2), 1e-10)


def test_orbital_rotation_labels():
    rotation = orbital_rotation({(1, 3): 0.2}, {"2,3": 0.4}, n_modes=3)
    labels = [rotation.basis.labels[i] for i in rotation.generator_indices]
    assert labels == ["kappa[1,3]", "kappa'[2,3]"]
    with pytest.raises(UsageError):
        orbital_rotation({"11": 0.1}, n_modes=2)


@pytest.mark.parametrize("tau,axis", [(0.8, [1, 0, 0]), (1.3, [0, 0, 1]), (2.1, [1, 2, -1])])
def test_qmf_rotation_matrix(tau, axis):
    """单比特转动 e^{−iτ n·σ/2}（差一个整体相位）"""
    rotation = qmf_rotation([tau], [axis])
    unitary = rotation_matrix(rotation).matrix
    n = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    sigma = n[0] * np.array([[0, 1], [1, 0]]) + n[1] * np.array([[0, -1j], [1j, 0]]) + n[2] * np.diag([1, -1])
    expected = np.cos(tau / 2) * np.eye(2) - 1j * np.sin(tau / 2) * sigma
    assert abs(np.trace(expected.conj().T @ unitary)) == pytest.approx(2.0, abs=1e-9)


def test_qmf_rotation_rejects_zero_axis():
    with pytest.raises(UsageError):
        qmf_rotation([0.5], [[0, 0, 0]])


def test_bogoliubov_identity_transform():
    transform = BogoliubovTransform(U=np.eye(2), V=np.zeros((2, 2)))
    assert transform.violations() == []
    operators = bogoliubov_generators(transform)
    assert operators.creators[0] == creation(1, 2)
    assert operators.car_residual < 1e-12
    assert operators.csa[1] == number(2, 2) * 1j


def test_bogoliubov_particle_hole_swap():
    """U = 0，V = I：B_q† = a_q，准粒子真空为满占据态"""
    transform = BogoliubovTransform(U=np.zeros((2, 2)), V=np.eye(2))
    assert transform.violations() == []
    operators = bogoliubov_generators(transform)
    assert operators.creators[0] == annihilation(1, 2)
    assert operators.annihilators[1] == creation(2, 2)
    assert operators.car_residual < 1e-12
    assert operators.csa[0] == (identity(FERMIONIC, 2) - number(1, 2)) * 1j


def test_bogoliubov_violation_names_constraint():
    transform = BogoliubovTransform(U=2 * np.eye(2), V=np.zeros((2, 2)))
    assert 'U†U+V†V=1' in transform.violations()
    with pytest.raises(ConstraintError) as info:
        bogoliubov_generators(transform)
    assert 'U†U+V†V=1' in info.value.details['violated']


def test_pairing_hamiltonian_quasiparticles():
    """准粒子能量给出多体谱的激发能"""
    h = np.diag([1.0, 1.5])
    delta = np.array([[0.0, 0.3], [-0.3, 0.0]])
    transform, energies = bogoliubov_from_quadratic(h, delta)
    assert transform.violations() == []
    assert np.all(energies > 0)
    values = np.linalg.eigvalsh(to_matrix(quadratic_hamiltonian(h, delta)).matrix)
    excitations = np.sort(values - values[0])
    expected = np.sort([0.0, energies[0], energies[1], energies[0] + energies[1]])
    assert np.allclose(excitations, expected, atol=1e-8)


def test_pairing_requires_antisymmetric_delta():
    with pytest.raises(ConstraintError):
        bogoliubov_from_quadratic(np.eye(2), np.array([[0.0, 0.3], [0.3, 0.0]]))


def _check_u_tori(n, seed):
    rng = np.random.default_rng(seed)
    basis = u_basis(n)
    element = basis.element(rng.normal(size=basis.dimension))
    scale = np.linalg.norm(basis.coordinates(element))
    result = maximal_tori_diagonalize(element, basis, seed=seed)
    single = np.array([[(element.coefficient(((p, 1), (q, 0))) * -1j) for q in range(1, n + 1)]
                       for p in range(1, n + 1)])
    assert np.allclose(np.sort(result.csa_coefficients), np.sort(np.linalg.eigvalsh(single)), atol=1e-8 * scale)
    assert result.residual <= 1e-8 * scale
    rotated = apply_rotation(result.rotation, element)
    coords = np.zeros(basis.dimension)
    coords[list(basis.csa_indices)] = result.csa_coefficients
    assert rotated.allclose(basis.element(coords), 1e-8 * scale)


def _check_qubit_tori(seed):
    rng = np.random.default_rng(seed)
    basis = qubit_basis(3)
    coords = rng.normal(size=basis.dimension)
    result = maximal_tori_diagonalize(basis.element(coords), basis, seed=seed)
    norms = [np.sqrt(sum(coords[basis.index(f"i{axis}[{k}]")] ** 2 for axis in "xyz")) for k in range(1, 4)]
    assert np.allclose(np.abs(result.csa_coefficients), norms, atol=1e-8 * np.linalg.norm(coords))
    assert result.residual <= 1e-8 * np.linalg.norm(coords)


@pytest.mark.parametrize("n,seed", [(2, 2), (3, 3)])
def test_maximal_tori_u(n, seed):
    """u(N) 元素转到 CSA 后的系数为单粒子矩阵 −iX 的本征值"""
    _check_u_tori(n, seed)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_maximal_tori_qubits(seed):
    """每个比特的 CSA 系数绝对值等于该比特 (x, y, z) 分量的模"""
    _check_qubit_tori(seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_maximal_tori_random_u3(seed):
    _check_u_tori(3, 100 + seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_maximal_tori_random_qubits(seed):
    _check_qubit_tori(100 + seed)


def test_maximal_tori_already_diagonal():
    basis = qubit_basis(2)
    element = pauli('z', 1, 2) * 0.5j
    result = maximal_tori_diagonalize(element, basis)
    assert result.rotation.is_identity()
    assert result.restarts_used == 0
    assert np.allclose(result.csa_coefficients, [0.5, 0.0])


def test_reorder_euler_angles():
    """z-y-z 欧拉分解倒序后仍可表示同一个转动"""
    basis = qubit_basis(1)
    rotation = MFRotation.from_labels(basis, [("iz[1]", 0.3), ("iy[1]", 0.7), ("iz[1]", -0.4)])
    reordered = reorder_rotation(rotation, [2, 1, 0], seed=3)
    distance = np.linalg.norm(rotation_matrix(reordered).matrix - rotation_matrix(rotation).matrix)
    assert distance < 1e-8


def test_reorder_rejects_bad_permutation():
    rotation = MFRotation.from_labels(qubit_basis(1), [("iz[1]", 0.3)])
    with pytest.raises(UsageError):
        reorder_rotation(rotation, [1])


def test_majorana_rotation_preserves_majorana_family():
    basis = so_even_basis(1)
    rotation = MFRotation.from_labels(basis, [("S[1,2]", 0.4)])
    image = apply_rotation(rotation, majorana(1, 1))
    assert image.family == MAJORANA
    # e^{−θ γ1γ2/2} γ1 e^{θ γ1γ2/2} = cos θ γ1 + sin θ γ2
    expected = majorana(1, 1) * np.cos(0.4) + majorana(2, 1) * np.sin(0.4)
    assert image.allclose(expected, 1e-10)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
