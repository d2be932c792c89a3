#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 矩阵表示与精确对角化
功能：算符多项式在 2^N 占据数/计算基上的矩阵表示、精确对角化（判据的最终依据）、
      期望值与方差、平均场态判定（约化密度矩阵幂等性/纯度）
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from config import TOLERANCES
from errors import ConstraintError, DimensionCapError, UsageError
from log_utils import get_logger
from operators import FERMIONIC, MAJORANA, PAULI, OperatorPolynomial, fermionic_from_majorana

logger = get_logger("matrix_rep")


@dataclass(frozen=True, eq=False)
class MatrixRep:
    """2^N 维稠密复矩阵（模式1对应最低位）"""

    matrix: np.ndarray
    family: str
    n_modes: int

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.matrix))) if self.matrix.size else 1.0)
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol * scale)

    def dagger(self) -> "MatrixRep":
        return MatrixRep(self.matrix.conj().T, self.family, self.n_modes)


@dataclass
class EigenSystem:
    """
    精确本征系统

    values 升序；vectors 的列为正交归一本征向量；groups 为简并分组（下标列表）
    """

    values: np.ndarray
    vectors: np.ndarray
    groups: List[List[int]]
    norm: float
    max_residual: float = 0.0

    def degenerate(self, index: int) -> bool:
        return any(len(group) > 1 and index in group for group in self.groups)


@dataclass(frozen=True)
class CsaEigenstate:
    """CSA 共同本征态 |C̄_J⟩：label 为占据数（费米子）或 ẑ 本征值（量子比特），index 为基矢下标"""

    label: Tuple[int, ...]
    index: int


@dataclass
class MFStateCheck:
    """平均场态判定结果"""

    is_mf: bool
    error: float
    criterion: str
    details: Dict = field(default_factory=dict)


def _check_cap(n_modes: int):
    cap = int(TOLERANCES['oracle_mode_cap'])
    if n_modes > cap:
        raise DimensionCapError(f"模式数 {n_modes} 超过精确对角化上限 {cap}（维数 {2 ** cap}）")


@lru_cache(maxsize=32)
def _popcounts(n_modes: int) -> np.ndarray:
    states = np.arange(2 ** n_modes)
    counts = np.zeros_like(states)
    for bit in range(n_modes):
        counts += (states >> bit) & 1
    return counts


def particle_numbers(n_modes: int) -> np.ndarray:
    """每个基矢的粒子数（占据位数）"""
    return _popcounts(n_modes).copy()


def _term_action(family: str, key, n_modes: int):
    """单个规范算符串作用在全部基矢上: 返回 (有效掩码, 新基矢, 相位)"""
    dim = 2 ** n_modes
    states = np.arange(dim)
    columns = states.copy()
    phase = np.ones(dim, dtype=complex)
    valid = np.ones(dim, dtype=bool)
    popcounts = _popcounts(n_modes)
    for factor in reversed(key):
        if family == FERMIONIC:
            mode, dagger = factor
            bit = 1 << (mode - 1)
            occupied = (states & bit) != 0
            valid &= ~occupied if dagger else occupied
            below = popcounts[states & (bit - 1)]
            phase *= np.where(below % 2, -1.0, 1.0)
            states = states ^ bit
        else:
            qubit, axis = factor
            bit = 1 << (qubit - 1)
            flipped = (states & bit) != 0
            if axis == 'z':
                phase *= np.where(flipped, -1.0, 1.0)
            elif axis == 'x':
                states = states ^ bit
            else:
                phase *= np.where(flipped, -1j, 1j)
                states = states ^ bit
    return valid, states, columns, phase


def to_sparse(p: OperatorPolynomial, n_modes: Optional[int] = None) -> sparse.csr_matrix:
    """稀疏矩阵表示（scipy.sparse 组装）"""
    n_modes = p.n_modes if n_modes is None else n_modes
    _check_cap(n_modes)
    if p.max_index() > n_modes:
        raise UsageError(f"多项式的编号 {p.max_index()} 超出 N={n_modes}")
    if p.family == MAJORANA:
        p = fermionic_from_majorana(p)
    dim = 2 ** n_modes
    rows, cols, data = [], [], []
    for key, coeff in p.items():
        valid, states, columns, phase = _term_action(p.family, key, n_modes)
        rows.append(states[valid])
        cols.append(columns[valid])
        data.append(coeff * phase[valid])
    if not rows:
        return sparse.csr_matrix((dim, dim), dtype=complex)
    return sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim), dtype=complex,
    ).tocsr()


def to_matrix(p: OperatorPolynomial, n_modes: Optional[int] = None) -> MatrixRep:
    """
    稠密矩阵表示

    费米子：占据数基矢上直接作用，相位 (−1)^(p 以下的占据数)；
    Pauli：ẑ = diag(1, −1)，比特1为最低位；Majorana：先代回费米子算符。

    Raises:
        DimensionCapError: N 超过上限
    """
    n_modes = p.n_modes if n_modes is None else n_modes
    family = p.family
    return MatrixRep(to_sparse(p, n_modes).toarray(), family, n_modes)


def _as_array(H: Union[MatrixRep, np.ndarray]) -> np.ndarray:
    return H.matrix if isinstance(H, MatrixRep) else np.asarray(H)


def operator_norm(H: Union[MatrixRep, np.ndarray]) -> float:
    """‖H‖ = 最大本征值绝对值（厄米矩阵）"""
    matrix = _as_array(H)
    if not matrix.size:
        return 0.0
    values = np.linalg.eigvalsh(matrix)
    return float(np.max(np.abs(values)))


def exact_eigensystem(H: Union[MatrixRep, np.ndarray], degeneracy_tol: Optional[float] = None) -> EigenSystem:
    """
    精确对角化

    Raises:
        ConstraintError: 输入矩阵不是厄米矩阵
    """
    matrix = _as_array(H)
    scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 1.0)
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10 * scale:
        raise ConstraintError("精确对角化需要厄米矩阵")
    degeneracy_tol = TOLERANCES['degeneracy'] if degeneracy_tol is None else degeneracy_tol
    values, vectors = np.linalg.eigh(matrix)
    norm = float(np.max(np.abs(values))) if len(values) else 0.0

    groups: List[List[int]] = []
    for index, value in enumerate(values):
        if groups and abs(value - values[groups[-1][-1]]) <= degeneracy_tol * max(norm, 1e-300):
            groups[-1].append(index)
        else:
            groups.append([index])

    residual = float(np.max(np.linalg.norm(matrix @ vectors - vectors * values, axis=0))) if len(values) else 0.0
    if residual > TOLERANCES['eigen_residual'] * max(norm, 1.0):
        logger.warning(f"本征对残差偏大: {residual:.2e}")
    return EigenSystem(values=values, vectors=vectors, groups=groups, norm=norm, max_residual=residual)


def _prepare_state(state: np.ndarray, normalize: bool) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > TOLERANCES['normalization']:
        if not normalize or norm == 0:
            raise ConstraintError(f"态未归一化: ‖ψ‖ = {norm:.6g}")
        state = state / norm
    return state


def expectation(H: Union[MatrixRep, np.ndarray], state: np.ndarray, normalize: bool = False) -> float:
    """⟨ψ|H|ψ⟩"""
    state = _prepare_state(state, normalize)
    return float(np.vdot(state, _as_array(H) @ state).real)


def variance(H: Union[MatrixRep, np.ndarray], state: np.ndarray, normalize: bool = False) -> float:
    """⟨H²⟩ − ⟨H⟩²，按 ‖(H − ⟨H⟩)ψ‖² 计算，恒非负"""
    state = _prepare_state(state, normalize)
    image = _as_array(H) @ state
    mean = np.vdot(state, image).real
    return float(np.linalg.norm(image - mean * state) ** 2)


# ---------------------------------------------------------------------------
# CSA 本征态
# ---------------------------------------------------------------------------

def csa_label(index: int, family: str, n_modes: int) -> Tuple[int, ...]:
    bits = tuple((index >> (k - 1)) & 1 for k in range(1, n_modes + 1))
    if family == PAULI:
        return tuple(1 - 2 * b for b in bits)
    return bits


def csa_index(label: Sequence[int], family: str) -> int:
    bits = [(1 - z) // 2 for z in label] if family == PAULI else list(label)
    return sum(int(b) << k for k, b in enumerate(bits))


def csa_eigenstates(family: str, n_modes: int) -> List[CsaEigenstate]:
    """全部 CSA 共同本征态（基矢）"""
    _check_cap(n_modes)
    return [CsaEigenstate(csa_label(i, family, n_modes), i) for i in range(2 ** n_modes)]


def basis_vector(index: int, dimension: int) -> np.ndarray:
    vector = np.zeros(dimension, dtype=complex)
    vector[index] = 1.0
    return vector


# ---------------------------------------------------------------------------
# 平均场态判定
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _annihilators(n_modes: int) -> Tuple[sparse.csr_matrix, ...]:
    return tuple(to_sparse(OperatorPolynomial(FERMIONIC, n_modes, {((p, 0),): 1.0}), n_modes)
                 for p in range(1, n_modes + 1))


def one_body_rdm(state: np.ndarray, n_modes: int) -> np.ndarray:
    """D_pq = ⟨a_p† a_q⟩"""
    images = [a @ state for a in _annihilators(n_modes)]
    return np.array([[np.vdot(ip, iq) for iq in images] for ip in images])


def generalized_rdm(state: np.ndarray, n_modes: int) -> np.ndarray:
    """Γ_IJ = ⟨b_I† b_J⟩，b = (a_1..a_N, a_1†..a_N†)"""
    annihilators = _annihilators(n_modes)
    images = [a @ state for a in annihilators] + [a.conj().T @ state for a in annihilators]
    return np.array([[np.vdot(ii, ij) for ij in images] for ii in images])


def _qubit_purities(state: np.ndarray, n_qubits: int) -> List[float]:
    tensor = state.reshape((2,) * n_qubits)
    purities = []
    for qubit in range(1, n_qubits + 1):
        axis = n_qubits - qubit
        others = [a for a in range(n_qubits) if a != axis]
        rho = np.tensordot(tensor, tensor.conj(), axes=(others, others))
        purities.append(float(np.real(np.trace(rho @ rho))))
    return purities


def has_definite_number(state: np.ndarray, n_modes: int, tol: float = 1e-10) -> bool:
    weights = np.abs(state) ** 2
    counts = _popcounts(n_modes)
    sectors = {int(c) for c in np.unique(counts[weights > tol])}
    return len(sectors) <= 1


def mf_state_check(state: np.ndarray, family: str, n_modes: int,
                   tol: Optional[float] = None, normalize: bool = False) -> MFStateCheck:
    """
    平均场态判定

    量子比特：每个单比特约化密度矩阵纯度为1（乘积态）；
    费米子定粒子数：1-RDM 幂等（Slater 行列式）；
    费米子不定粒子数：广义 1-RDM（a, a† 加倍指标）幂等。
    """
    _check_cap(n_modes)
    state = _prepare_state(state, normalize)
    if family == PAULI:
        tol = TOLERANCES['purity'] if tol is None else tol
        purities = _qubit_purities(state, n_modes)
        error = max(1.0 - p for p in purities) if purities else 0.0
        return MFStateCheck(error <= tol, error, 'purity', {'purities': purities})

    tol = TOLERANCES['idempotency'] if tol is None else tol
    if has_definite_number(state, n_modes):
        density = one_body_rdm(state, n_modes)
        criterion = 'slater'
    else:
        density = generalized_rdm(state, n_modes)
        criterion = 'generalized'
    error = float(np.linalg.norm(density @ density - density))
    return MFStateCheck(error <= tol, error, criterion,
                        {'occupations': np.real(np.diag(density)).tolist()})


def matrix_distance(a: Union[MatrixRep, np.ndarray], b: Union[MatrixRep, np.ndarray]) -> float:
    """谱范数距离"""
    difference = _as_array(a) - _as_array(b)
    if not difference.size:
        return 0.0
    return float(np.linalg.norm(difference, 2))
