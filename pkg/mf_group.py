#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 平均场转动群
功能：参数化平均场幺正变换 Û = ∏ e^{θ_k Â_k}（轨道转动、Bogoliubov变换、单比特转动），
      伴随作用、矩阵指数、极大环面对角化、因子重排
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize
from tqdm import tqdm

from config import TOLERANCES, get_default_optimizer
from errors import ConstraintError, DimensionCapError, InconclusiveError, UsageError
from lie_algebra import AlgebraBasis, qubit_basis, u_basis
from log_utils import get_logger
from matrix_rep import MatrixRep, to_matrix
from operators import (FERMIONIC, OperatorPolynomial, adjoint, anticommutator, coefficient_matrix,
                       commutator, multiply)

logger = get_logger("mf_group")

OPTIMIZER = get_default_optimizer()

# 单个基本因子的 Krylov 子空间维数上限
KRYLOV_CAP = 4096


@dataclass(frozen=True, eq=False)
class MFRotation:
    """
    平均场转动 Û = e^{θ_1 Â_1} e^{θ_2 Â_2} ⋯（按列出顺序从左到右相乘）

    factors 为 (生成元下标, 角度) 列表，生成元取自 basis。
    """

    basis: AlgebraBasis
    factors: Tuple[Tuple[int, float], ...] = ()

    @classmethod
    def identity(cls, basis: AlgebraBasis) -> "MFRotation":
        return cls(basis, ())

    @classmethod
    def from_labels(cls, basis: AlgebraBasis, pairs: Iterable[Tuple[str, float]]) -> "MFRotation":
        return cls(basis, tuple((basis.index(label), float(angle)) for label, angle in pairs))

    @property
    def angles(self) -> np.ndarray:
        return np.array([angle for _, angle in self.factors], dtype=float)

    @property
    def generator_indices(self) -> List[int]:
        return [index for index, _ in self.factors]

    def with_angles(self, angles: Sequence[float]) -> "MFRotation":
        return MFRotation(self.basis, tuple((index, float(a)) for (index, _), a in zip(self.factors, angles)))

    def inverse(self) -> "MFRotation":
        """Û† : 因子倒序、角度取负"""
        return MFRotation(self.basis, tuple((index, -angle) for index, angle in reversed(self.factors)))

    def compose(self, other: "MFRotation") -> "MFRotation":
        """self · other"""
        if other.basis is not self.basis and other.basis.to_dict() != self.basis.to_dict():
            raise UsageError("两个转动属于不同的代数基")
        return MFRotation(self.basis, self.factors + other.factors)

    def is_identity(self) -> bool:
        return all(angle == 0 for _, angle in self.factors)

    def to_dict(self) -> Dict:
        return {
            'algebra': self.basis.to_dict(),
            'factors': [{'generator': self.basis.labels[index], 'angle': angle}
                        for index, angle in self.factors],
        }

    @classmethod
    def from_dict(cls, data: Mapping, basis: Optional[AlgebraBasis] = None) -> "MFRotation":
        basis = basis or AlgebraBasis.from_dict(data['algebra'])
        return cls.from_labels(basis, [(f['generator'], f['angle']) for f in data.get('factors', [])])

    def __repr__(self):
        body = ", ".join(f"{self.basis.labels[i]}:{a:.6g}" for i, a in self.factors)
        return f"MFRotation([{body}])"


# ---------------------------------------------------------------------------
# 矩阵路径
# ---------------------------------------------------------------------------

def _generator_matrix(basis: AlgebraBasis, index: int, n_modes: int) -> np.ndarray:
    cache = basis.__dict__.setdefault('_matrix_cache', {})
    key = (index, n_modes)
    if key not in cache:
        cache[key] = to_matrix(basis.generators[index], n_modes).matrix
    return cache[key]


def rotation_matrix(R: MFRotation, n_modes: Optional[int] = None) -> MatrixRep:
    """Û 的矩阵: 按列出顺序的矩阵指数乘积"""
    n_modes = R.basis.n_modes if n_modes is None else n_modes
    unitary = np.eye(2 ** n_modes, dtype=complex)
    for index, angle in R.factors:
        if angle:
            unitary = unitary @ expm(angle * _generator_matrix(R.basis, index, n_modes))
    return MatrixRep(unitary, R.basis.family, n_modes)


# ---------------------------------------------------------------------------
# 伴随作用
# ---------------------------------------------------------------------------

def adjoint_action_matrix(R: MFRotation) -> np.ndarray:
    """Û†xÛ 在代数坐标下的线性映射 M_m ⋯ M_1，M_k = exp(−θ_k ad_{A_k})"""
    basis = R.basis
    total = np.eye(basis.dimension)
    for index, angle in R.factors:
        if angle:
            total = expm(-angle * basis.ad_matrices[index]) @ total
    return total


def _in_span(polys: List[OperatorPolynomial], candidate: OperatorPolynomial) -> bool:
    _, matrix = coefficient_matrix(polys + [candidate])
    solution, *_ = np.linalg.lstsq(matrix[:, :-1], matrix[:, -1], rcond=None)
    residual = np.linalg.norm(matrix[:, :-1] @ solution - matrix[:, -1])
    return residual <= 1e-10 * max(1.0, np.linalg.norm(matrix[:, -1]))


def _krylov_image(generator: OperatorPolynomial, factor_poly: OperatorPolynomial, angle: float) -> OperatorPolynomial:
    """e^{−θ ad_A}(f)：在 f 的 ad_A-Krylov 子空间内做矩阵指数"""
    krylov = [factor_poly]
    images: List[OperatorPolynomial] = []
    while len(images) < len(krylov):
        image = commutator(generator, krylov[len(images)])
        images.append(image)
        if not _in_span(krylov, image):
            krylov.append(image)
            if len(krylov) > KRYLOV_CAP:
                raise DimensionCapError("伴随作用的 Krylov 子空间过大")
    keys, _ = coefficient_matrix(krylov + images)
    _, basis_matrix = coefficient_matrix(krylov, keys=keys)
    _, image_matrix = coefficient_matrix(images, keys=keys)
    representation, *_ = np.linalg.lstsq(basis_matrix, image_matrix, rcond=None)
    vector = expm(-angle * representation)[:, 0]
    result = OperatorPolynomial.zero(factor_poly.family, factor_poly.n_modes)
    for coeff, poly in zip(vector, krylov):
        result = result + poly * coeff
    return result


def _conjugate_once(p: OperatorPolynomial, generator: OperatorPolynomial, angle: float) -> OperatorPolynomial:
    """e^{−θA} p e^{θA}：逐个基本因子变换后重新相乘"""
    n_modes = max(p.n_modes, generator.n_modes)
    images: Dict = {}
    result = OperatorPolynomial.zero(p.family, n_modes)
    for key, coeff in p.items():
        term = OperatorPolynomial.constant(coeff, p.family, n_modes)
        for factor in key:
            if factor not in images:
                elementary = OperatorPolynomial(p.family, n_modes, {(factor,): 1.0})
                images[factor] = _krylov_image(generator, elementary, angle)
            term = multiply(term, images[factor])
        result = result + term
    return result


def apply_rotation(R: MFRotation, p: OperatorPolynomial) -> OperatorPolynomial:
    """
    Û† p Û（因子1最先作用: e^{−θ_1 ad_{A_1}}，依次类推）

    p 落在代数的线性张成内时直接用结构常数的伴随矩阵；否则对每个基本因子
    在 Krylov 子空间内求 e^{−θ ad}，再重建乘积（保持多项式次数）。

    Raises:
        ConstraintError: p 不在该基的包络代数中（算符族不一致）
    """
    basis = R.basis
    if p.family != basis.family:
        raise ConstraintError(f"多项式（{p.family}）不在 {basis.family} 基的包络代数中")
    if R.is_identity():
        return p
    try:
        coords = basis.coordinates(p)
    except ConstraintError:
        coords = None
    if coords is not None:
        return basis.element(adjoint_action_matrix(R) @ coords)
    for index, angle in R.factors:
        if angle:
            p = _conjugate_once(p, basis.generators[index], angle)
    return p


# ---------------------------------------------------------------------------
# 轨道转动与单比特转动
# ---------------------------------------------------------------------------

def _pair(key) -> Tuple[int, int]:
    if isinstance(key, str):
        digits = key.replace(",", "").replace(" ", "")
        if len(digits) != 2 or not digits.isdigit():
            raise UsageError(f"无法解析模式对: {key}")
        key = (int(digits[0]), int(digits[1]))
    p, q = int(key[0]), int(key[1])
    if p == q:
        raise UsageError(f"轨道转动需要 p≠q: {key}")
    return (p, q) if p < q else (q, p)


def orbital_rotation(thetas: Mapping, phis: Optional[Mapping] = None,
                     n_modes: Optional[int] = None, basis: Optional[AlgebraBasis] = None) -> MFRotation:
    """
    u(N) 轨道转动 ∏_{p<q} e^{κ̂_pq θ_pq} e^{κ̂'_pq φ_pq}

    Args:
        thetas: {(p, q) 或 "pq": θ_pq}
        phis: {(p, q) 或 "pq": φ_pq}
        n_modes: 模式数（缺省取出现的最大编号）
    """
    phis = phis or {}
    theta_map = {_pair(k): float(v) for k, v in thetas.items()}
    phi_map = {_pair(k): float(v) for k, v in phis.items()}
    pairs = sorted(set(theta_map) | set(phi_map))
    if n_modes is None:
        n_modes = basis.n_modes if basis is not None else max((q for _, q in pairs), default=1)
    basis = basis or u_basis(n_modes)
    factors = []
    for p, q in pairs:
        if (p, q) in theta_map:
            factors.append((basis.index(f"kappa[{p},{q}]"), theta_map[(p, q)]))
        if (p, q) in phi_map:
            factors.append((basis.index(f"kappa'[{p},{q}]"), phi_map[(p, q)]))
    return MFRotation(basis, tuple(factors))


def _zyz_angles(unitary: np.ndarray) -> Tuple[float, float, float]:
    """SU(2) 矩阵 = Rz(a) Ry(b) Rz(c)，R_n(φ) = e^{−iφσ_n/2}"""
    b = 2 * np.arctan2(abs(unitary[1, 0]), abs(unitary[0, 0]))
    if abs(unitary[0, 0]) < 1e-12:
        a_plus_c = 0.0
        a_minus_c = 2 * np.angle(unitary[1, 0])
    elif abs(unitary[1, 0]) < 1e-12:
        a_plus_c = 2 * np.angle(unitary[1, 1])
        a_minus_c = 0.0
    else:
        a_plus_c = 2 * np.angle(unitary[1, 1])
        a_minus_c = 2 * np.angle(unitary[1, 0])
    return (a_plus_c + a_minus_c) / 2, b, (a_plus_c - a_minus_c) / 2


def qmf_rotation(taus: Sequence[float], axes: Sequence[Sequence[float]],
                 basis: Optional[AlgebraBasis] = None) -> MFRotation:
    """
    量子比特平均场转动 ∏_k e^{−iτ_k n̄_k·σ̂_k/2}

    每个比特的转动分解为 ẑ-ŷ-ẑ 欧拉角，落在 {iẑ_k, iŷ_k} 生成元上。
    """
    n_qubits = len(taus)
    basis = basis or qubit_basis(n_qubits)
    sigma = [np.array([[0, 1], [1, 0]], dtype=complex),
             np.array([[0, -1j], [1j, 0]], dtype=complex),
             np.array([[1, 0], [0, -1]], dtype=complex)]
    factors = []
    for k, (tau, axis) in enumerate(zip(taus, axes), start=1):
        axis = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise UsageError(f"比特 {k} 的转轴为零向量")
        axis = axis / norm
        generator = sum(c * s for c, s in zip(axis, sigma))
        a, b, c = _zyz_angles(expm(-0.5j * tau * generator))
        # e^{θ·iσ} = R(−2θ)
        factors.extend([(basis.index(f"iz[{k}]"), -a / 2), (basis.index(f"iy[{k}]"), -b / 2),
                        (basis.index(f"iz[{k}]"), -c / 2)])
    return MFRotation(basis, tuple(factors))


# ---------------------------------------------------------------------------
# Bogoliubov 变换
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BogoliubovTransform:
    """B̂_q† = Σ_p U_pq â_p† + V_pq â_p"""

    U: np.ndarray
    V: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.U.shape[0]

    def constraint_residuals(self) -> Dict[str, float]:
        U, V = np.asarray(self.U, dtype=complex), np.asarray(self.V, dtype=complex)
        eye = np.eye(U.shape[0])
        return {
            'U†U+V†V=1': float(np.max(np.abs(U.conj().T @ U + V.conj().T @ V - eye))),
            'UU†+V*Vᵀ=1': float(np.max(np.abs(U @ U.conj().T + V.conj() @ V.T - eye))),
            'UᵀV+VᵀU=0': float(np.max(np.abs(U.T @ V + V.T @ U))),
            'UV†+V*Uᵀ=0': float(np.max(np.abs(U @ V.conj().T + V.conj() @ U.T))),
        }

    def violations(self, tol: Optional[float] = None) -> List[str]:
        tol = TOLERANCES['bogoliubov'] if tol is None else tol
        return [name for name, value in self.constraint_residuals().items() if value > tol]


@dataclass
class BogoliubovOperators:
    """准粒子算符与对应的CSA {iB̂_p†B̂_p}"""

    creators: List[OperatorPolynomial]
    annihilators: List[OperatorPolynomial]
    csa: List[OperatorPolynomial]
    car_residual: float


def bogoliubov_generators(T: BogoliubovTransform, tol: Optional[float] = None) -> BogoliubovOperators:
    """
    构造准粒子算符并校验反对易关系

    Raises:
        ConstraintError: (U, V) 违反约束（列出违反项）或 CAR 校验失败
    """
    violated = T.violations(tol)
    if violated:
        residuals = T.constraint_residuals()
        listing = ", ".join(f"{name} (偏差 {residuals[name]:.2e})" for name in violated)
        raise ConstraintError(f"Bogoliubov 约束不满足: {listing}", violated=violated)
    n = T.n_modes
    creators = []
    for q in range(n):
        terms = {}
        for p in range(n):
            terms[((p + 1, 1),)] = T.U[p, q]
            terms[((p + 1, 0),)] = T.V[p, q]
        creators.append(OperatorPolynomial(FERMIONIC, n, terms))
    annihilators = [adjoint(c) for c in creators]

    residual = 0.0
    for p in range(n):
        for q in range(n):
            mixed = anticommutator(annihilators[p], creators[q]) - (1.0 if p == q else 0.0)
            same = anticommutator(annihilators[p], annihilators[q])
            residual = max(residual, max((abs(c) for _, c in mixed.items()), default=0.0),
                           max((abs(c) for _, c in same.items()), default=0.0))
    if residual > TOLERANCES['car']:
        raise ConstraintError(f"准粒子算符不满足反对易关系（偏差 {residual:.2e}）")
    csa = [multiply(creators[p], annihilators[p]) * 1j for p in range(n)]
    return BogoliubovOperators(creators, annihilators, csa, residual)


def quadratic_hamiltonian(h: np.ndarray, delta: np.ndarray) -> OperatorPolynomial:
    """Ĥ = Σ h_pq â_p†â_q + ½ Σ (Δ_pq â_p†â_q† + Δ_pq* â_q â_p)"""
    h = np.asarray(h, dtype=complex)
    delta = np.asarray(delta, dtype=complex)
    n = h.shape[0]
    products = []
    for p in range(n):
        for q in range(n):
            products.append(([(p + 1, 1), (q + 1, 0)], h[p, q]))
            if p != q:
                products.append(([(p + 1, 1), (q + 1, 1)], 0.5 * delta[p, q]))
                products.append(([(q + 1, 0), (p + 1, 0)], 0.5 * np.conj(delta[p, q])))
    return OperatorPolynomial.from_products(FERMIONIC, n, products)


def bogoliubov_from_quadratic(h: np.ndarray, delta: np.ndarray) -> Tuple[BogoliubovTransform, np.ndarray]:
    """
    对角化二次配对哈密顿量: BdG 矩阵 [[h, Δ], [−Δ*, −h*]] 的正本征值列给出 (U; V)

    Returns:
        (BogoliubovTransform, 准粒子能量 ε_q)，满足 [Ĥ, B̂_q†] = ε_q B̂_q†

    Raises:
        ConstraintError: h 非厄米、Δ 非反对称，或存在零能模
    """
    h = np.asarray(h, dtype=complex)
    delta = np.asarray(delta, dtype=complex)
    if np.max(np.abs(h - h.conj().T)) > 1e-10:
        raise ConstraintError("h 必须是厄米矩阵")
    if np.max(np.abs(delta + delta.T)) > 1e-10:
        raise ConstraintError("Δ 必须是反对称矩阵")
    n = h.shape[0]
    bdg = np.block([[h, delta], [-delta.conj(), -h.conj()]])
    values, vectors = np.linalg.eigh(bdg)
    positive = values[n:]
    if np.min(np.abs(positive)) < 1e-10:
        raise ConstraintError("BdG 谱存在零能模，准粒子不唯一")
    transform = BogoliubovTransform(U=vectors[:n, n:], V=vectors[n:, n:])

    hamiltonian = quadratic_hamiltonian(h, delta)
    operators = bogoliubov_generators(transform)
    for energy, creator in zip(positive, operators.creators):
        if not (commutator(hamiltonian, creator) - creator * energy).is_zero(1e-8):
            raise ConstraintError(f"准粒子算符不是能量 {energy:.6g} 的升算符")
    return transform, positive


# ---------------------------------------------------------------------------
# 极大环面对角化
# ---------------------------------------------------------------------------

def _chain_objective(ad_stack: np.ndarray, off_mask: np.ndarray, start: np.ndarray):
    """返回 f(θ) = ‖P_off M(θ) c‖² 及其解析梯度，M(θ) = M_m⋯M_1"""

    def objective(angles):
        transfers = [expm(-angle * ad) for angle, ad in zip(angles, ad_stack)]
        forward = [start]
        for transfer in transfers:
            forward.append(transfer @ forward[-1])
        residual = forward[-1] * off_mask
        value = float(residual @ residual)
        gradient = np.zeros(len(angles))
        backward = 2 * residual
        for k in range(len(angles) - 1, -1, -1):
            gradient[k] = backward @ (-ad_stack[k] @ forward[k + 1])
            backward = backward @ transfers[k]
        return value, gradient

    return objective


@dataclass
class ToriResult:
    rotation: MFRotation
    csa_coefficients: np.ndarray
    residual: float
    restarts_used: int


def maximal_tori_diagonalize(x, basis: AlgebraBasis, seed: int = 0, restarts: Optional[int] = None,
                             tol: Optional[float] = None, progress: bool = False) -> ToriResult:
    """
    极大环面定理的数值实现: 求 Û 使 Û†(Σ c_k Â_k)Û = Σ b_l Ĉ_l

    在伴随表示坐标中最小化非CSA分量的平方和（BFGS + 解析梯度），
    第0次重启从恒等变换出发，其余从 [−π, π) 均匀随机出发。

    Args:
        x: 代数元素（OperatorPolynomial）或实坐标向量
        basis: 紧致基（带CSA）

    Raises:
        InconclusiveError: 重启预算内未达到容差
    """
    if not basis.csa_indices:
        raise ConstraintError("基没有指定CSA")
    coords = np.asarray(basis.coordinates(x) if isinstance(x, OperatorPolynomial) else x, dtype=float)
    restarts = OPTIMIZER['tori_restarts'] if restarts is None else restarts
    tol = TOLERANCES['maximal_tori'] if tol is None else tol
    scale = max(np.linalg.norm(coords), 1e-300)

    off_mask = np.ones(basis.dimension)
    off_mask[list(basis.csa_indices)] = 0.0
    moving = [k for k in range(basis.dimension) if k not in basis.csa_indices]
    template = MFRotation(basis, tuple((k, 0.0) for k in moving))
    if np.linalg.norm(coords * off_mask) <= tol * scale:
        return ToriResult(MFRotation.identity(basis), coords[list(basis.csa_indices)], 0.0, 0)

    objective = _chain_objective(basis.ad_matrices[moving], off_mask, coords / scale)
    rng = np.random.default_rng(seed)
    best = None
    iterator = tqdm(range(restarts), desc="极大环面", disable=not progress)
    for attempt in iterator:
        start = np.zeros(len(moving)) if attempt == 0 else rng.uniform(-np.pi, np.pi, len(moving))
        result = minimize(objective, start, jac=True, method='BFGS',
                          options={'gtol': OPTIMIZER['gtol'], 'maxiter': OPTIMIZER['maxiter']})
        residual = np.sqrt(max(result.fun, 0.0))
        if best is None or residual < best[0]:
            best = (residual, result.x)
        logger.debug(f"极大环面重启 {attempt}: 残差 {residual:.3e}")
        if residual <= tol:
            rotation = template.with_angles(result.x)
            rotated = adjoint_action_matrix(rotation) @ coords
            return ToriResult(rotation, rotated[list(basis.csa_indices)], float(residual * scale), attempt + 1)
    raise InconclusiveError(f"极大环面对角化未收敛: 最小相对残差 {best[0]:.3e}（{restarts} 次重启）",
                            residual=float(best[0]))


def reorder_rotation(R: MFRotation, order: Sequence[int], seed: int = 0,
                     restarts: Optional[int] = None, tol: float = 1e-8) -> MFRotation:
    """
    以新的因子顺序重新拟合角度，使矩阵 Û 不变（乘积顺序只是规范选择）

    Args:
        R: 原转动
        order: 新顺序（原因子位置的排列）

    Raises:
        InconclusiveError: 重启预算内矩阵距离未降到 tol 以下
    """
    if sorted(order) != list(range(len(R.factors))):
        raise UsageError(f"不是合法的因子排列: {list(order)}")
    target = rotation_matrix(R).matrix
    candidate = MFRotation(R.basis, tuple(R.factors[i] for i in order))
    restarts = OPTIMIZER['tori_restarts'] if restarts is None else restarts
    rng = np.random.default_rng(seed)

    def distance(angles):
        difference = rotation_matrix(candidate.with_angles(angles)).matrix - target
        return float(np.real(np.vdot(difference, difference)))

    best = None
    for attempt in range(restarts):
        start = candidate.angles if attempt == 0 else rng.uniform(-np.pi, np.pi, len(order))
        result = minimize(distance, start, method='BFGS', options={'gtol': 1e-12, 'maxiter': OPTIMIZER['maxiter']})
        value = np.sqrt(max(result.fun, 0.0))
        if best is None or value < best[0]:
            best = (value, result.x)
        if value <= tol:
            return candidate.with_angles(result.x)
    raise InconclusiveError(f"因子重排未收敛: 最小矩阵距离 {best[0]:.3e}")

