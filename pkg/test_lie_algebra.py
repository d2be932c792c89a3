#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试 lie_algebra 模块
标准基的维数与结构常数、李闭包、CSA 选取和升降算符
"""

import itertools
import sys

import numpy as np
import pytest

from errors import ConstraintError, DimensionCapError, UsageError
from lie_algebra import (AlgebraBasis, algebra_summary, default_basis, ladder_set, lie_closure,
                         qubit_basis, so_even_basis, so_odd_basis, standard_basis, u_basis)
from operators import (MAJORANA, PAULI, OperatorPolynomial, annihilation, commutator, creation,
                       excitation, majorana, pauli)


@pytest.mark.parametrize("builder,n,dimension", [
    (u_basis, 2, 4), (u_basis, 3, 9),
    (so_even_basis, 2, 6), (so_even_basis, 3, 15),
    (so_odd_basis, 2, 10), (so_odd_basis, 3, 21),
    (qubit_basis, 2, 6), (qubit_basis, 3, 9),
])
def test_standard_dimensions(builder, n, dimension):
    basis = builder(n)
    assert basis.dimension == dimension
    assert basis.rank == n
    assert basis.imag_residual < 1e-12
    assert basis.field_flag == 'real-compact'


@pytest.mark.parametrize("kind", ['u', 'so_even', 'so_odd', 'qubit'])
def test_jacobi_identity(kind):
    assert standard_basis(kind, 2).jacobi_residual() < 1e-10


def test_default_kinds():
    assert default_basis('fermionic', 2).kind == 'u'
    assert default_basis(MAJORANA, 2).kind == 'so_even'
    assert default_basis(PAULI, 2).kind == 'qubit'
    with pytest.raises(UsageError):
        standard_basis('sp', 2)


def test_so_odd_relations():
    """[S_ab, S_cd] = δ_bc S_ad − δ_ac S_bd − δ_bd S_ac + δ_ad S_bc，对 N=2 的全部指标组合成立（0 为附加指标）"""
    basis = so_odd_basis(2)
    zero = OperatorPolynomial.zero(MAJORANA, 2)

    def S(a, b):
        if a == b:
            return zero
        if b == 0:
            return basis.generators[basis.index(f"S[{a},0]")]
        if a == 0:
            return -basis.generators[basis.index(f"S[{b},0]")]
        if a < b:
            return basis.generators[basis.index(f"S[{a},{b}]")]
        return -basis.generators[basis.index(f"S[{b},{a}]")]

    def delta(x, y):
        return 1.0 if x == y else 0.0

    indices = range(5)
    for a, b, c, d in itertools.product(indices, repeat=4):
        if a == b or c == d:
            continue
        expected = (S(a, d) * delta(b, c) - S(b, d) * delta(a, c)
                    - S(a, c) * delta(b, d) + S(b, c) * delta(a, d))
        assert commutator(S(a, b), S(c, d)) == expected, (a, b, c, d)


def test_coordinates_round_trip():
    basis = u_basis(3)
    rng = np.random.default_rng(2)
    coords = rng.normal(size=basis.dimension)
    assert np.allclose(basis.coordinates(basis.element(coords)), coords)


def test_coordinates_outside_span():
    with pytest.raises(ConstraintError):
        u_basis(2).coordinates(excitation(1, 2, 2))


def test_non_closed_generators_raise():
    with pytest.raises(ConstraintError):
        AlgebraBasis.from_generators([pauli('x', 1, 1) * 1j, pauli('y', 1, 1) * 1j])


def test_dependent_generators_raise():
    x = pauli('x', 1, 1) * 1j
    with pytest.raises(ConstraintError):
        AlgebraBasis.from_generators([x, x * 2])


def test_hermitian_generators_give_complex_structure_constants():
    """厄米生成元 [x, y] = 2i z：结构常数为虚数"""
    basis = AlgebraBasis.from_generators([pauli(a, 1, 1) for a in "xyz"])
    assert basis.imag_residual == pytest.approx(2.0)
    assert basis.field_flag == 'complex-extension'


def test_closure_of_two_pauli_rotations():
    basis = lie_closure([pauli('z', 1, 1) * 1j, pauli('x', 1, 1) * 1j])
    assert basis.dimension == 3
    assert basis.rank == 1
    assert basis.labels[0] == "iz[1]"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_closure_of_single_majoranas_is_so_odd(n):
    """{−iγ_j/2} 生成 so(2N+1)"""
    seed = [majorana(j, n) * -0.5j for j in range(1, 2 * n + 1)]
    basis = lie_closure(seed)
    assert basis.dimension == 2 * n * n + n
    assert basis.rank == n
    assert basis.labels[:n] == tuple(f"S[{2 * p - 1},{2 * p}]" for p in range(1, n + 1))


@pytest.mark.parametrize("n", [1, 2])
def test_closure_of_linear_fermionic_terms(n):
    """a_p − a_p† 与 i(a_p + a_p†) 生成 so(2N+1)，N=2 时维数 10"""
    seed = []
    for p in range(1, n + 1):
        seed.append(annihilation(p, n) - creation(p, n))
        seed.append((annihilation(p, n) + creation(p, n)) * 1j)
    basis = lie_closure(seed)
    assert basis.dimension == 2 * n * n + n
    assert basis.rank == n
    assert basis.imag_residual < 1e-10


def test_closure_of_excitations_is_u3():
    seed = []
    for p in range(1, 4):
        for q in range(p, 4):
            if p == q:
                seed.append(excitation(p, p, 3) * 1j)
            else:
                seed.append(excitation(p, q, 3) - excitation(q, p, 3))
                seed.append((excitation(p, q, 3) + excitation(q, p, 3)) * 1j)
    basis = lie_closure(seed)
    assert basis.dimension == 9
    assert basis.rank == 3
    assert basis.labels[:3] == ("iE[1,1]", "iE[2,2]", "iE[3,3]")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_closure_of_single_qubit_rotations(n):
    """{iz_k, ix_k, iy_k} 已经闭合，维数 3N"""
    seed = [pauli(axis, k, n) * 1j for axis in "zxy" for k in range(1, n + 1)]
    basis = lie_closure(seed)
    assert basis.dimension == 3 * n
    assert basis.rank == n
    assert basis.imag_residual < 1e-10


def test_closure_of_real_rotation():
    """κ̂_12 与 κ̂'_12 生成 su(2)，CSA 由贪心扩充补足"""
    basis = u_basis(2)
    seed = [basis.generators[basis.index("kappa[1,2]")], basis.generators[basis.index("kappa'[1,2]")]]
    closure = lie_closure(seed)
    assert closure.dimension == 3
    assert closure.rank == 1


def test_closure_dimension_cap():
    with pytest.raises(DimensionCapError):
        lie_closure([pauli('x', 1, 1) * 1j, pauli('y', 1, 1) * 1j], dimension_cap=2)


def test_closure_rejects_hermitian_seed():
    with pytest.raises(ConstraintError):
        lie_closure([pauli('x', 1, 1)])


def test_custom_basis_serialization():
    closure = lie_closure([pauli('z', 1, 2) * 1j, pauli('x', 1, 2) * pauli('x', 2, 2) * 1j])
    restored = AlgebraBasis.from_dict(closure.to_dict())
    assert restored.labels == closure.labels
    assert restored.csa_indices == closure.csa_indices
    for a, b in zip(restored.generators, closure.generators):
        assert a == b


def test_ladders_of_u2():
    ladders = ladder_set(u_basis(2))
    assert len(ladders.raising) == 1
    assert ladders.raising[0] == excitation(2, 1, 2)
    assert ladders.lowering[0] == excitation(1, 2, 2)
    assert np.allclose(ladders.roots, [[-1.0, 1.0]])


def test_ladders_of_single_qubit():
    ladders = ladder_set(qubit_basis(1))
    assert ladders.raising[0] == pauli('x', 1, 1) + pauli('y', 1, 1) * 1j
    assert ladders.lowering[0] == pauli('x', 1, 1) - pauli('y', 1, 1) * 1j
    assert np.allclose(ladders.roots, [[2.0]])
    assert ladders.hermitian_csa[0] == pauli('z', 1, 1)


def test_ladder_count_matches_dimension():
    basis = so_even_basis(3)
    ladders = ladder_set(basis)
    assert 2 * len(ladders.raising) + basis.rank == basis.dimension


def test_ladders_need_csa():
    basis = AlgebraBasis.from_generators([pauli(a, 1, 1) * 1j for a in "xyz"])
    with pytest.raises(ConstraintError):
        ladder_set(basis)


def test_algebra_summary():
    summary = algebra_summary(qubit_basis(2))
    assert summary['dimension'] == 6
    assert summary['csa'] == ["iz[1]", "iz[2]"]
    assert summary['field'] == 'real-compact'
    assert summary['jacobi_residual'] < 1e-10


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
