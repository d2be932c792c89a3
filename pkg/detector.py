#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 可解性判定
功能：方差最小化寻找平均场转动，逐层剥离 CSA 多项式，判定哈密顿量为第 K 类可解、
      部分可解或不可解；精确对角化交叉核对；量子比特约化哈密顿量
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from tqdm import tqdm

from builder import (ClassLevel, ClassSpec, CsaPolynomial, ProjectorSpec, build_class_matrix)
from config import TOLERANCES, get_default_optimizer
from errors import ConstraintError, UsageError
from lie_algebra import AlgebraBasis, default_basis
from log_utils import get_logger
from matrix_rep import (CsaEigenstate, MFStateCheck, basis_vector, csa_label, exact_eigensystem,
                        matrix_distance, mf_state_check, operator_norm, to_matrix, variance)
from mf_group import MFRotation, rotation_matrix
from operators import MAJORANA, PAULI, OperatorPolynomial, is_hermitian

logger = get_logger("detector")

OPTIMIZER = get_default_optimizer()

VERDICTS = ('class', 'partial', 'not-MF-solvable', 'inconclusive')


# ---------------------------------------------------------------------------
# 方差地形
# ---------------------------------------------------------------------------

class _VarianceLandscape:
    """
    G' = U G U†，U = ∏ e^{θ_k A_k}（矩阵表示，G 已按 ‖H‖ 归一）

    目标函数 J_S = Σ_{c∈S} Σ_{c'≠c} |G'_{c'c}|²，即参考态 U†|c⟩ 的方差之和。
    """

    def __init__(self, matrix: np.ndarray, generators: Sequence[np.ndarray],
                 tol: float, optimizer: Dict[str, Any]):
        self.matrix = matrix
        self.generators = list(generators)
        self.tol = tol
        self.optimizer = optimizer
        self.dimension = matrix.shape[0]
        # e^{θA} = V diag(e^{iθλ}) V†，−iA = V diag(λ) V†
        self._spectra = [np.linalg.eigh(-1j * g) for g in self.generators]

    @property
    def size(self) -> int:
        return len(self.generators)

    def _factors(self, angles) -> List[np.ndarray]:
        return [vectors @ (np.exp(1j * angle * values)[:, None] * vectors.conj().T)
                for angle, (values, vectors) in zip(angles, self._spectra)]

    def unitary(self, angles) -> np.ndarray:
        result = np.eye(self.dimension, dtype=complex)
        for factor in self._factors(angles):
            result = result @ factor
        return result

    def rotated(self, angles) -> np.ndarray:
        unitary = self.unitary(angles)
        return unitary @ self.matrix @ unitary.conj().T

    def column_residuals(self, angles) -> np.ndarray:
        rotated = self.rotated(angles)
        off = rotated - np.diag(np.diag(rotated))
        return np.sum(np.abs(off) ** 2, axis=0)

    def _mask(self, columns: Sequence[int]) -> np.ndarray:
        mask = np.zeros((self.dimension, self.dimension))
        columns = list(columns)
        mask[:, columns] = 1.0
        mask[columns, columns] = 0.0
        return mask

    def objective(self, columns: Sequence[int]):
        """J_S 及其解析梯度 ∂J/∂θ_k = 2 Re tr(A_k L_k† K L_k)，K = G'Y† − Y†G'"""
        mask = self._mask(columns)

        def value_and_gradient(angles):
            prefixes = [np.eye(self.dimension, dtype=complex)]
            for factor in self._factors(angles):
                prefixes.append(prefixes[-1] @ factor)
            unitary = prefixes[-1]
            rotated = unitary @ self.matrix @ unitary.conj().T
            off = mask * rotated
            value = float(np.real(np.vdot(off, off)))
            kernel = rotated @ off.conj().T - off.conj().T @ rotated
            gradient = np.array([2 * np.real(np.sum(generator.T * (prefix.conj().T @ kernel @ prefix)))
                                 for generator, prefix in zip(self.generators, prefixes[:-1])])
            return value, gradient

        if self.optimizer.get('gradient', 'analytic') == 'analytic':
            return value_and_gradient

        step = float(self.optimizer.get('fd_step', 1e-6))

        def finite_difference(angles):
            value = value_and_gradient(angles)[0]
            gradient = np.zeros(len(angles))
            for k in range(len(angles)):
                shifted = np.array(angles, dtype=float)
                shifted[k] += step
                gradient[k] = (value_and_gradient(shifted)[0] - value) / step
            return value, gradient

        return finite_difference

    def search(self, columns: Sequence[int], start: np.ndarray, restarts: int,
               rng: np.random.Generator, gtol: Optional[float] = None) -> Tuple[np.ndarray, bool, int]:
        """
        BFGS 多次重启：第0次从 start 出发，其余从 [−π, π) 均匀随机出发

        Returns:
            (最优角度, 是否每一列方差都 ≤ tol, 实际重启次数)
        """
        columns = list(columns)
        if self.size == 0:
            residuals = self.column_residuals(start)
            return start, bool(np.max(residuals[columns]) <= self.tol), 1
        objective = self.objective(columns)
        options = {'gtol': self.optimizer['gtol'] if gtol is None else gtol,
                   'maxiter': self.optimizer.get('variance_maxiter', self.optimizer['maxiter'])}
        best_angles, best_worst = start, np.inf
        for attempt in range(max(1, restarts)):
            x0 = start if attempt == 0 else rng.uniform(-np.pi, np.pi, self.size)
            result = minimize(objective, x0, jac=True, method='BFGS', options=options)
            worst = float(np.max(self.column_residuals(result.x)[columns]))
            if worst < best_worst:
                best_angles, best_worst = result.x, worst
            logger.debug(f"  重启 {attempt}: |S|={len(columns)} 最大方差 {worst:.3e}")
            if worst <= self.tol:
                return result.x, True, attempt + 1
        return best_angles, False, max(1, restarts)

    def eigen_columns(self, angles, active: Sequence[int]) -> List[int]:
        residuals = self.column_residuals(angles)
        return [c for c in active if residuals[c] <= self.tol]


# ---------------------------------------------------------------------------
# 数据类型
# ---------------------------------------------------------------------------

@dataclass
class LevelReport:
    """一层的发现结果：转动 U_i、负责的基矢、CSA 多项式与投影"""

    level: int
    rotation: MFRotation
    states: List[int]
    function: CsaPolynomial
    projector: Optional[ProjectorSpec]
    restarts: int
    max_residual: float

    def to_dict(self) -> Dict:
        data = {
            'level': self.level,
            'rotation': {'factors': self.rotation.to_dict()['factors']},
            'states': self.states,
            'function': self.function.to_dict(),
            'restarts': self.restarts,
            'max_residual': self.max_residual,
        }
        if self.projector is not None:
            data['projector'] = self.projector.to_dict()
        return data


@dataclass
class EigenRecord:
    """平均场本征态 V̂_J|C̄_J⟩ 的证书"""

    energy: float
    label: Tuple[int, ...]
    index: int
    level: int
    variance: float
    is_mf: bool
    mf_error: float

    def to_dict(self) -> Dict:
        return {'energy': self.energy, 'label': list(self.label), 'index': self.index, 'level': self.level,
                'variance': self.variance, 'is_mf': self.is_mf, 'mf_error': self.mf_error}


@dataclass
class ClassificationReport:
    """判定报告"""

    verdict: str
    K: Optional[int]
    n_mf: int
    dimension: int
    norm: float
    family: str
    n_modes: int
    basis: AlgebraBasis
    levels: List[LevelReport] = field(default_factory=list)
    spec: Optional[ClassSpec] = None
    eigenstates: List[EigenRecord] = field(default_factory=list)
    oracle: List[Dict] = field(default_factory=list)
    complement: List[Dict] = field(default_factory=list)
    reconstruction: Optional[float] = None
    optimizer_limited: bool = False
    inconclusive_level: Optional[int] = None
    restarts_used: int = 0
    notes: List[str] = field(default_factory=list)

    def describe(self) -> str:
        if self.verdict == 'class':
            return f"class({self.K})"
        if self.verdict == 'partial':
            return f"partial({self.n_mf} of {self.dimension})"
        return self.verdict

    @property
    def max_variance(self) -> float:
        return max((record.variance for record in self.eigenstates), default=0.0)

    def to_dict(self) -> Dict:
        return {
            'verdict': self.verdict,
            'summary': self.describe(),
            'K': self.K,
            'mf_states': self.n_mf,
            'dimension': self.dimension,
            'family': self.family,
            'modes': self.n_modes,
            'norm': self.norm,
            'algebra': self.basis.to_dict(),
            'optimizer_limited': self.optimizer_limited,
            'inconclusive_level': self.inconclusive_level,
            'levels': [level.to_dict() for level in self.levels],
            'spec': self.spec.to_dict() if self.spec is not None else None,
            'eigenstates': [record.to_dict() for record in self.eigenstates],
            'certificates': {
                'reconstruction': self.reconstruction,
                'max_variance': self.max_variance,
            },
            'oracle': self.oracle,
            'complement': self.complement,
            'telemetry': {
                'restarts': self.restarts_used,
                'final_variances': [level.max_residual for level in self.levels],
            },
            'notes': self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), ensure_ascii=False, indent=2)


def _plain(value):
    """numpy 标量转为 JSON 可写的 Python 数值"""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


# ---------------------------------------------------------------------------
# 公共辅助
# ---------------------------------------------------------------------------

def _hamiltonian_matrix(H, basis: AlgebraBasis) -> np.ndarray:
    if isinstance(H, OperatorPolynomial):
        if H.family != basis.family:
            raise UsageError(f"哈密顿量属于 {H.family}，代数基属于 {basis.family}")
        if H.max_index() > basis.n_modes:
            raise UsageError(f"哈密顿量的指标 {H.max_index()} 超出代数基的模式数 {basis.n_modes}")
        if not is_hermitian(H, 1e-8):
            raise ConstraintError("哈密顿量不是厄米算符")
        return to_matrix(H, basis.n_modes).matrix
    matrix = np.asarray(H, dtype=complex)
    if matrix.shape != (2 ** basis.n_modes,) * 2:
        raise UsageError(f"矩阵维数 {matrix.shape} 与 2^{basis.n_modes} 不符")
    return matrix


def _generator_matrices(basis: AlgebraBasis) -> List[np.ndarray]:
    return [to_matrix(g, basis.n_modes).matrix for g in basis.generators]


def _commutes(matrix: np.ndarray, mask: np.ndarray, tol: float) -> bool:
    # P 为对角阵: [A, P]_{ab} = A_ab (P_b − P_a)
    return np.max(np.abs(matrix * (mask[None, :] - mask[:, None]))) <= tol


def _allowed_generators(matrices: List[np.ndarray], masks: List[np.ndarray],
                        active: Sequence[int]) -> List[int]:
    """与前面各层投影都对易、且在活动子空间上不为零的生成元"""
    active = list(active)
    allowed = []
    for k, matrix in enumerate(matrices):
        if not all(_commutes(matrix, mask, TOLERANCES['commutation']) for mask in masks):
            continue
        if np.max(np.abs(matrix[np.ix_(active, active)]), initial=0.0) <= TOLERANCES['coefficient_cutoff']:
            continue
        allowed.append(k)
    return allowed


def _merged_optimizer(budget: Optional[int], optimizer: Optional[Dict]) -> Dict[str, Any]:
    merged = dict(OPTIMIZER)
    for key, value in (optimizer or {}).items():
        if key not in merged:
            raise UsageError(f"未知优化器参数: {key}")
        merged[key] = value
    if budget is not None:
        merged['budget'] = budget
    return merged


def _reachable_mf(check: MFStateCheck, basis: AlgebraBasis) -> bool:
    """u(N) 转动保持粒子数，只能到达 Slater 行列式"""
    if basis.kind == 'u':
        return check.is_mf and check.criterion == 'slater'
    return check.is_mf


# ---------------------------------------------------------------------------
# 方差最小化
# ---------------------------------------------------------------------------

def minimize_variance(H, reference: CsaEigenstate, basis: Optional[AlgebraBasis] = None,
                      budget: Optional[int] = None, seed: int = 0,
                      optimizer: Optional[Dict] = None) -> Tuple[MFRotation, float]:
    """
    求 Û 使参考态 Û†|C̄⟩ 的方差 ⟨Ĥ²⟩ − ⟨Ĥ⟩² 最小

    Returns:
        (MFRotation, 精确方差)；方差不为零是结果而不是错误
    """
    basis = basis or default_basis(H.family, H.n_modes)
    options = _merged_optimizer(budget, optimizer)
    matrix = _hamiltonian_matrix(H, basis)
    scale = operator_norm(matrix) or 1.0
    generators = _generator_matrices(basis)
    dim = matrix.shape[0]
    allowed = _allowed_generators(generators, [], range(dim))
    landscape = _VarianceLandscape(matrix / scale, [generators[k] for k in allowed],
                                   TOLERANCES['zero_variance'], options)
    rng = np.random.default_rng(seed)
    angles, _, used = landscape.search([reference.index], np.zeros(landscape.size), options['budget'], rng)
    rotation = MFRotation(basis, tuple(zip(allowed, (float(a) for a in angles))))
    state = rotation_matrix(rotation).matrix.conj().T @ basis_vector(reference.index, dim)
    value = variance(matrix, state)
    logger.debug(f"参考态 {reference.label}: 方差 {value:.3e}（{used} 次重启）")
    return rotation, value


# ---------------------------------------------------------------------------
# CSA 多项式分离
# ---------------------------------------------------------------------------

@dataclass
class CsaSplit:
    """H̃ = (只含CSA元素的项) + 剩余；P̂_1 为 H̃ 的本征基矢张成的子空间，F_1 取其对角值"""

    csa_part: OperatorPolynomial
    remainder: OperatorPolynomial
    indices: List[int]
    projector: ProjectorSpec
    function: CsaPolynomial


def _is_csa_key(family: str, key) -> bool:
    if family == PAULI:
        return all(axis == 'z' for _, axis in key)
    if family == MAJORANA:
        indices = set(key)
        return all((j + 1 if j % 2 else j - 1) in indices for j in indices)
    creations = sorted(mode for mode, dagger in key if dagger)
    annihilations = sorted(mode for mode, dagger in key if not dagger)
    return creations == annihilations


def csa_polynomial_split(H: OperatorPolynomial) -> CsaSplit:
    """
    分离纯 CSA 多项式部分，并找出 H̃ 的本征基矢（残差 ≤ 1e−8·‖H̃‖）

    Raises:
        ConstraintError: H̃ 不是厄米算符
    """
    if not is_hermitian(H, 1e-8):
        raise ConstraintError("CSA 分离需要厄米算符")
    n_modes = max(H.n_modes, 1)
    csa_terms = {key: coeff for key, coeff in H.items() if _is_csa_key(H.family, key)}
    csa_part = OperatorPolynomial(H.family, H.n_modes, csa_terms)
    remainder = H - csa_part

    matrix = to_matrix(H, n_modes).matrix
    scale = operator_norm(matrix)
    off = matrix - np.diag(np.diag(matrix))
    residuals = np.linalg.norm(off, axis=0)
    indices = [int(c) for c in np.flatnonzero(residuals <= TOLERANCES['reconstruction'] * max(scale, 1e-300))]
    values = np.zeros(matrix.shape[0])
    values[indices] = np.real(np.diag(matrix))[indices]
    function = CsaPolynomial.from_values(values, H.family, n_modes)
    projector = ProjectorSpec.from_indices(indices, H.family, n_modes)
    return CsaSplit(csa_part, remainder, indices, projector, function)


# ---------------------------------------------------------------------------
# 逐层搜索
# ---------------------------------------------------------------------------

@dataclass
class _LevelFound:
    angles: np.ndarray
    states: List[int]
    restarts: int


def _search_level(landscape: _VarianceLandscape, active: List[int], options: Dict,
                  rng: np.random.Generator, progress: bool, level: int) -> _LevelFound:
    """
    一层的搜索：先尝试整块对角化；失败则从每个参考态出发最小化方差，
    再贪心地逐个加入其它基矢，取本征基矢最多的转动
    """
    zeros = np.zeros(landscape.size)
    angles, ok, used = landscape.search(active, zeros, options['budget'], rng)
    if ok:
        return _LevelFound(angles, list(active), used)

    initial = landscape.column_residuals(zeros)
    seeds = sorted(active, key=lambda c: (initial[c], c))
    best = _LevelFound(zeros, [], 0)
    covered = set()
    for seed in tqdm(seeds, desc=f"第{level}层参考态", disable=not progress):
        if seed in covered:
            continue
        angles, ok, n = landscape.search([seed], zeros, options['seed_restarts'], rng)
        used += n
        if not ok:
            continue
        states = landscape.eigen_columns(angles, active)
        residuals = landscape.column_residuals(angles)
        for candidate in sorted(set(active) - set(states), key=lambda c: (residuals[c], c)):
            if candidate in states:
                continue
            trial = sorted(set(states) | {candidate})
            grown, ok, n = landscape.search(trial, angles, options['growth_restarts'], rng)
            used += n
            if ok:
                angles = grown
                states = sorted(set(trial) | set(landscape.eigen_columns(grown, active)))
        covered |= set(states)
        logger.debug(f"第{level}层 参考态 {seed}: 找到 {len(states)} 个本征基矢")
        if len(states) > len(best.states):
            best = _LevelFound(angles, sorted(states), 0)
        if len(best.states) == len(active):
            break

    if best.states:
        polished, ok, n = landscape.search(best.states, best.angles, 1, rng, gtol=options['gtol'] * 1e-3)
        used += n
        if ok:
            best.angles = polished
    best.restarts = used
    return best


def _values_on(rotated: np.ndarray, states: Sequence[int], scale: float) -> np.ndarray:
    values = np.zeros(rotated.shape[0])
    states = list(states)
    values[states] = np.real(np.diag(rotated))[states] * scale
    return values


def _indicator(states: Sequence[int], dimension: int) -> np.ndarray:
    mask = np.zeros(dimension)
    mask[list(states)] = 1.0
    return mask


# ---------------------------------------------------------------------------
# 判定
# ---------------------------------------------------------------------------

def classify(H, basis: Optional[AlgebraBasis] = None, budget: Optional[int] = None, seed: int = 0,
             tol_variance: Optional[float] = None, optimizer: Optional[Dict] = None,
             progress: bool = False) -> ClassificationReport:
    """
    判定哈密顿量的平均场可解性

    第 i 层在前面各层的补空间中寻找转动 U_i（只用与前面各投影对易的生成元），
    使尽可能多的 CSA 基矢成为 U_i⋯U_1 H U_1†⋯U_i† 的本征向量；这些基矢组成 P_i，
    对角值给出 F_i。补空间为空时为第 K 类；某层一个也找不到时为部分可解（或不可解）。
    所有结论都用精确对角化核对：重构误差、逐态方差与平均场判据、补空间本征向量的判据。

    Args:
        H: 厄米的 OperatorPolynomial 或 2^N 维矩阵
        basis: 平均场代数基（缺省按算符族取标准基）
        budget: 每层整块对角化的重启次数
        seed: 随机重启的种子

    Raises:
        DimensionCapError: 模式数超过精确对角化上限
        ConstraintError: 哈密顿量不是厄米算符
    """
    if basis is None:
        if not isinstance(H, OperatorPolynomial):
            raise UsageError("矩阵输入需要显式给出代数基")
        basis = default_basis(H.family, max(H.n_modes, 1))
    options = _merged_optimizer(budget, optimizer)
    tol = TOLERANCES['zero_variance'] if tol_variance is None else tol_variance
    family, n_modes = basis.family, basis.n_modes
    matrix = _hamiltonian_matrix(H, basis)
    dim = matrix.shape[0]
    norm = operator_norm(matrix)
    scale = norm if norm > 0 else 1.0
    rng = np.random.default_rng(seed)
    generators = _generator_matrices(basis)
    # 纯 CSA 多项式在恒等转动下已对角，第1层不必优化
    split = csa_polynomial_split(H) if isinstance(H, OperatorPolynomial) else None
    diagonal_input = split is not None and split.remainder.is_zero()

    report = ClassificationReport(verdict='inconclusive', K=None, n_mf=0, dimension=dim, norm=norm,
                                  family=family, n_modes=n_modes, basis=basis)
    current = matrix / scale
    frame = np.eye(dim, dtype=complex)
    active = list(range(dim))
    masks: List[np.ndarray] = []
    frames: List[np.ndarray] = []

    while active:
        level = len(report.levels) + 1
        allowed = _allowed_generators(generators, masks, active)
        landscape = _VarianceLandscape(current, [generators[k] for k in allowed], tol, options)
        if level == 1 and diagonal_input:
            logger.debug("输入只含 CSA 项，第1层取恒等转动")
            found = _LevelFound(np.zeros(landscape.size), list(active), 0)
        else:
            found = _search_level(landscape, active, options, rng, progress, level)
        report.restarts_used += found.restarts
        if not found.states:
            report.inconclusive_level = level
            logger.warning(f"第 {level} 层未找到零方差的平均场转动（{found.restarts} 次优化）")
            break

        rotation = MFRotation(basis, tuple(zip(allowed, (float(a) for a in found.angles))))
        unitary = landscape.unitary(found.angles)
        current = unitary @ current @ unitary.conj().T
        frame = unitary @ frame
        residuals = np.sum(np.abs(current - np.diag(np.diag(current))) ** 2, axis=0)
        last = len(found.states) == len(active)
        function = CsaPolynomial.from_values(_values_on(current, found.states, scale), family, n_modes)
        projector = None if last else ProjectorSpec.from_indices(found.states, family, n_modes)
        report.levels.append(LevelReport(level, rotation, found.states, function, projector, found.restarts,
                                         float(np.max(residuals[found.states]))))
        frames.append(frame.copy())
        masks.append(_indicator(found.states, dim))
        active = [c for c in active if c not in set(found.states)]
        logger.info(f"第 {level} 层: {len(found.states)} 个平均场本征态，剩余 {len(active)} 维")

    _certify_states(report, matrix, frames)
    _cross_check(report, matrix, frame, active)
    _decide(report, matrix, active)
    logger.info(f"判定结果: {report.describe()}")
    return report


def _certify_states(report: ClassificationReport, matrix: np.ndarray, frames: List[np.ndarray]):
    """逐态证书: 方差（精确）与平均场判据"""
    dim = matrix.shape[0]
    for level, frame in zip(report.levels, frames):
        values = level.function.values(report.n_modes)
        for index in level.states:
            state = frame.conj().T @ basis_vector(index, dim)
            check = mf_state_check(state, report.family, report.n_modes, normalize=True)
            report.eigenstates.append(EigenRecord(
                energy=float(values[index]),
                label=csa_label(index, report.family, report.n_modes),
                index=int(index), level=level.level,
                variance=variance(matrix, state, normalize=True),
                is_mf=check.is_mf, mf_error=check.error))
    report.n_mf = len(report.eigenstates)


def _cross_check(report: ClassificationReport, matrix: np.ndarray, frame: np.ndarray, active: List[int]):
    """精确对角化: 全部本征向量的判据表，以及未解决子空间中本征向量的判据"""
    system = exact_eigensystem(matrix)
    for group in system.groups:
        for index in group:
            entry: Dict[str, Any] = {'energy': float(system.values[index]), 'degeneracy': len(group)}
            if len(group) == 1:
                check = mf_state_check(system.vectors[:, index], report.family, report.n_modes, normalize=True)
                entry.update({'criterion': check.criterion, 'error': check.error, 'is_mf': check.is_mf})
            report.oracle.append(entry)

    if not active:
        return
    block = (frame @ matrix @ frame.conj().T)[np.ix_(active, active)]
    block = (block + block.conj().T) / 2
    values, vectors = np.linalg.eigh(block)
    spread = max(report.norm, 1e-300) * TOLERANCES['degeneracy']
    for k, value in enumerate(values):
        degenerate = (k > 0 and abs(value - values[k - 1]) <= spread) or \
                     (k + 1 < len(values) and abs(values[k + 1] - value) <= spread)
        entry = {'energy': float(value), 'degenerate': bool(degenerate)}
        if not degenerate:
            embedded = np.zeros(matrix.shape[0], dtype=complex)
            embedded[active] = vectors[:, k]
            state = frame.conj().T @ embedded
            check = mf_state_check(state, report.family, report.n_modes, normalize=True)
            entry.update({'criterion': check.criterion, 'error': check.error,
                          'is_mf': _reachable_mf(check, report.basis)})
        report.complement.append(entry)


def _decide(report: ClassificationReport, matrix: np.ndarray, active: List[int]):
    if not active:
        levels = [ClassLevel(level.function, level.rotation, level.projector) for level in report.levels]
        spec = ClassSpec(report.family, report.n_modes, report.basis, levels)
        distance = matrix_distance(build_class_matrix(spec), matrix)
        report.reconstruction = distance
        report.spec = spec
        if distance <= TOLERANCES['reconstruction'] * max(report.norm, 1.0):
            report.verdict, report.K = 'class', len(levels)
        else:
            report.verdict = 'inconclusive'
            report.notes.append(f"重构误差 {distance:.3e} 超过容差")
        return

    report.optimizer_limited = True
    resolved = [entry for entry in report.complement if not entry['degenerate']]
    all_mf = bool(resolved) and len(resolved) == len(report.complement) and all(e['is_mf'] for e in resolved)
    any_mf = any(e.get('is_mf') for e in resolved)
    if report.n_mf == 0:
        report.verdict = 'not-MF-solvable'
        if any_mf:
            report.verdict = 'inconclusive'
            report.notes.append("精确本征向量中存在平均场态，优化器未找到")
        else:
            report.notes.append("结论受限于非凸优化（可能存在未找到的平均场转动）")
    elif all_mf:
        report.verdict = 'inconclusive'
        report.notes.append(f"第 {report.inconclusive_level} 层补空间的本征向量均为平均场态，优化器未找到对应转动")
    else:
        report.verdict = 'partial'


# ---------------------------------------------------------------------------
# 量子比特约化
# ---------------------------------------------------------------------------

def _split_qubit(H: OperatorPolynomial, qubit: int) -> Dict[Optional[str], OperatorPolynomial]:
    """H = A_0 + Σ_a A_a σ_a^(k)，A 不含第 k 个比特"""
    parts: Dict[Optional[str], Dict] = {None: {}, 'x': {}, 'y': {}, 'z': {}}
    for key, coeff in H.items():
        axis = next((a for k, a in key if k == qubit), None)
        rest = tuple(f for f in key if f[0] != qubit)
        parts[axis][rest] = parts[axis].get(rest, 0j) + coeff
    return {axis: OperatorPolynomial(PAULI, H.n_modes, terms) for axis, terms in parts.items()}


def commuting_axis(H: OperatorPolynomial, qubit: int) -> np.ndarray:
    """
    与 H 对易的单比特算符 n·σ^(k) 的方向 n（单位实向量，最大分量为正）

    [H, n·σ] = 0 当且仅当 (A_x, A_y, A_z) = n·B，即三者的系数向量秩 ≤ 1。

    Raises:
        ConstraintError: 第 k 个比特上没有与 H 对易的单比特算符
    """
    if H.family != PAULI:
        raise UsageError("qubit_reduce 只适用于 Pauli 多项式")
    if not 1 <= qubit <= H.n_modes:
        raise UsageError(f"比特编号 {qubit} 超出范围 1..{H.n_modes}")
    parts = _split_qubit(H, qubit)
    keys = sorted({key for axis in 'xyz' for key in parts[axis].terms}, key=lambda k: (len(k), k))
    if not keys:
        return np.array([0.0, 0.0, 1.0])
    stack = np.array([[parts[axis].coefficient(key) for key in keys] for axis in 'xyz'])
    stack = np.hstack([stack.real, stack.imag])
    u, s, _ = np.linalg.svd(stack)
    if len(s) > 1 and s[1] > 1e-10 * max(s[0], 1e-300):
        raise ConstraintError(f"第 {qubit} 个比特上没有与哈密顿量对易的单比特算符", qubit=qubit)
    direction = u[:, 0]
    return direction if direction[np.argmax(np.abs(direction))] > 0 else -direction


def qubit_reduce(H: OperatorPolynomial, qubit: int, sign: int = 1) -> OperatorPolynomial:
    """
    对第 k 个比特取 n·σ 本征态 |φ±⟩ 的部分期望: H_r = ⟨φ±|H|φ±⟩ = A_0 ± B

    其余比特的编号保持不变。
    """
    if sign not in (1, -1):
        raise UsageError(f"本征态选择必须为 +1 或 −1: {sign}")
    direction = commuting_axis(H, qubit)
    parts = _split_qubit(H, qubit)
    reduced = parts[None]
    for weight, axis in zip(direction, 'xyz'):
        if abs(weight) > TOLERANCES['coefficient_cutoff']:
            reduced = reduced + parts[axis] * (sign * weight)
    return reduced
