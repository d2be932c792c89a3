#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 李代数
功能：反厄米生成元基 AlgebraBasis（结构常数、Cartan子代数）、李闭包、
      标准基 u(N) / so(2N) / so(2N+1) / 量子比特 su(2)^N、升降算符
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import TOLERANCES
from errors import ConstraintError, DimensionCapError, UsageError
from log_utils import get_logger
from operators import (FERMIONIC, MAJORANA, PAULI, OperatorPolynomial, adjoint,
                       coefficient_matrix, commutator, excitation,
                       is_antihermitian, majorana, number, parse_polynomial, pauli, to_text)

logger = get_logger("lie_algebra")


# 标准代数种类 -> 算符族
STANDARD_KINDS = {
    'u': FERMIONIC,
    'so_even': MAJORANA,
    'so_odd': MAJORANA,
    'qubit': PAULI,
}


def _real_embedding(matrix: np.ndarray) -> np.ndarray:
    """复系数矩阵 -> 实矩阵 [Re; Im]（实数域上的线性无关性）"""
    return np.vstack([matrix.real, matrix.imag])


@dataclass(frozen=True, eq=False)
class AlgebraBasis:
    """
    对易闭合的反厄米生成元基

    structure_constants[i, j, k] 满足 [A_i, A_j] = Σ_k ξ[i,j,k] A_k；
    imag_residual 记录 ξ 虚部的最大值（紧致情形应为0）。
    """

    generators: Tuple[OperatorPolynomial, ...]
    labels: Tuple[str, ...]
    csa_indices: Tuple[int, ...]
    structure_constants: np.ndarray
    imag_residual: float
    field_flag: str
    kind: str = 'custom'

    # ---- 构造 ----
    @classmethod
    def from_generators(cls, generators: Sequence[OperatorPolynomial], csa_indices: Sequence[int] = (),
                        labels: Optional[Sequence[str]] = None, kind: str = 'custom',
                        tol: float = 1e-8) -> "AlgebraBasis":
        """
        计算结构常数并校验闭合性

        Raises:
            ConstraintError: 生成元线性相关，或某个对易子不在生成元张成空间内
        """
        generators = tuple(generators)
        if not generators:
            raise UsageError("生成元列表为空")
        family = generators[0].family
        if any(g.family != family for g in generators):
            raise UsageError("生成元属于不同算符族")
        n_modes = max(g.n_modes for g in generators)
        generators = tuple(g.with_modes(n_modes) for g in generators)
        labels = tuple(labels) if labels is not None else tuple(f"A[{k + 1}]" for k in range(len(generators)))

        keys, matrix = coefficient_matrix(generators)
        singular = np.linalg.svd(_real_embedding(matrix), compute_uv=False)
        if singular[-1] < TOLERANCES['independence_cutoff'] * max(1.0, singular[0]):
            raise ConstraintError("生成元在实数域上线性相关")
        pseudo_inverse = np.linalg.pinv(matrix)
        key_index = {key: i for i, key in enumerate(keys)}

        d = len(generators)
        xi = np.zeros((d, d, d), dtype=complex)
        for i in range(d):
            for j in range(i + 1, d):
                bracket = commutator(generators[i], generators[j])
                vector = np.zeros(len(keys), dtype=complex)
                for key, coeff in bracket.items():
                    if key not in key_index:
                        raise ConstraintError(
                            f"基不闭合: [{labels[i]}, {labels[j]}] 含有基外的算符串",
                            pair=(labels[i], labels[j]))
                    vector[key_index[key]] = coeff
                solution = pseudo_inverse @ vector
                residual = np.linalg.norm(matrix @ solution - vector)
                if residual > tol * max(1.0, np.linalg.norm(vector)):
                    raise ConstraintError(
                        f"基不闭合: [{labels[i]}, {labels[j]}] 的展开残差 {residual:.2e}",
                        pair=(labels[i], labels[j]))
                xi[i, j] = solution
                xi[j, i] = -solution

        imag_residual = float(np.max(np.abs(xi.imag))) if d > 1 else 0.0
        compact = all(is_antihermitian(g) for g in generators)
        basis = cls(
            generators=generators,
            labels=labels,
            csa_indices=tuple(csa_indices),
            structure_constants=xi.real.copy(),
            imag_residual=imag_residual,
            field_flag='real-compact' if compact else 'complex-extension',
            kind=kind,
        )
        if csa_indices:
            basis._check_csa_abelian()
        return basis

    def _check_csa_abelian(self):
        xi = self.structure_constants
        for a in self.csa_indices:
            for b in self.csa_indices:
                if np.max(np.abs(xi[a, b])) > TOLERANCES['commutation']:
                    raise ConstraintError(f"CSA元素 {self.labels[a]} 与 {self.labels[b]} 不对易")

    # ---- 属性 ----
    @property
    def dimension(self) -> int:
        return len(self.generators)

    @property
    def family(self) -> str:
        return self.generators[0].family

    @property
    def n_modes(self) -> int:
        return self.generators[0].n_modes

    @property
    def rank(self) -> int:
        return len(self.csa_indices)

    @property
    def csa(self) -> List[OperatorPolynomial]:
        return [self.generators[k] for k in self.csa_indices]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(f"基中不存在生成元: {label}")

    @cached_property
    def _coordinate_system(self):
        keys, matrix = coefficient_matrix(self.generators)
        return keys, _real_embedding(matrix), np.linalg.pinv(_real_embedding(matrix))

    def coordinates(self, p: OperatorPolynomial, tol: float = 1e-8) -> np.ndarray:
        """
        p 在生成元基下的实坐标

        Raises:
            ConstraintError: p 不是生成元的实线性组合
        """
        keys, embedded, pseudo_inverse = self._coordinate_system
        key_index = {key: i for i, key in enumerate(keys)}
        vector = np.zeros(len(keys), dtype=complex)
        for key, coeff in p.items():
            if key not in key_index:
                raise ConstraintError("算符不在代数的实线性张成空间内")
            vector[key_index[key]] = coeff
        stacked = np.concatenate([vector.real, vector.imag])
        coords = pseudo_inverse @ stacked
        residual = np.linalg.norm(embedded @ coords - stacked)
        if residual > tol * max(1.0, np.linalg.norm(stacked)):
            raise ConstraintError(f"算符不在代数的实线性张成空间内（残差 {residual:.2e}）")
        return coords

    def element(self, coords: Sequence[complex]) -> OperatorPolynomial:
        """Σ_k c_k A_k（c_k 可为复数，对应复扩张）"""
        result = OperatorPolynomial.zero(self.family, self.n_modes)
        for coeff, generator in zip(coords, self.generators):
            if coeff != 0:
                result = result + generator * coeff
        return result

    def ad_matrix(self, i: int) -> np.ndarray:
        """ad_{A_i} 在坐标下的矩阵: (ad_i)[k, j] = ξ[i, j, k]"""
        return self.structure_constants[i].T.copy()

    @cached_property
    def ad_matrices(self) -> np.ndarray:
        return np.stack([self.ad_matrix(i) for i in range(self.dimension)])

    def centralizer(self, indices: Sequence[int]) -> np.ndarray:
        """与给定生成元全部对易的子空间（返回坐标向量为列的矩阵）"""
        return self.centralizer_of([np.eye(self.dimension)[i] for i in indices])

    def centralizer_of(self, elements: Sequence[np.ndarray]) -> np.ndarray:
        if not elements:
            return np.eye(self.dimension)
        blocks = [np.tensordot(coords, self.ad_matrices, axes=(0, 0)) for coords in elements]
        stacked = np.vstack(blocks)
        _, singular, vh = np.linalg.svd(stacked)
        cutoff = TOLERANCES['independence_cutoff'] * max(1.0, singular[0] if len(singular) else 1.0)
        rank = int(np.sum(singular > cutoff))
        return vh[rank:].T

    def jacobi_residual(self) -> float:
        """Jacobi 恒等式在结构常数上的最大残差"""
        xi = self.structure_constants
        # Σ_m ξ[j,k,m] ξ[i,m,l] + 循环
        term = np.einsum('jkm,iml->ijkl', xi, xi)
        total = term + np.transpose(term, (1, 2, 0, 3)) + np.transpose(term, (2, 0, 1, 3))
        return float(np.max(np.abs(total))) if total.size else 0.0

    # ---- 序列化 ----
    def to_dict(self) -> Dict:
        if self.kind in STANDARD_KINDS:
            return {'kind': self.kind, 'modes': self.n_modes}
        return {
            'kind': 'custom',
            'family': self.family,
            'modes': self.n_modes,
            'generators': [{'label': label, 'text': to_text(g)}
                           for label, g in zip(self.labels, self.generators)],
            'csa': [self.labels[k] for k in self.csa_indices],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "AlgebraBasis":
        kind = data.get('kind')
        if kind in STANDARD_KINDS:
            return standard_basis(kind, int(data['modes']))
        if kind != 'custom':
            raise UsageError(f"未知代数种类: {kind}")
        family, modes = data['family'], int(data['modes'])
        labels = [g['label'] for g in data['generators']]
        generators = [parse_polynomial(g['text'], family, modes) for g in data['generators']]
        csa = [labels.index(label) for label in data.get('csa', [])]
        return cls.from_generators(generators, csa, labels)


# ---------------------------------------------------------------------------
# 标准基
# ---------------------------------------------------------------------------

def u_basis(n_modes: int) -> AlgebraBasis:
    """
    u(N): {iÊ^p_p} ∪ {κ̂_pq, κ̂'_pq}_{p<q}

    κ̂_pq = (Ê^p_q − Ê^q_p)/2, κ̂'_pq = i(Ê^p_q + Ê^q_p)/2，CSA = {iÊ^p_p}
    """
    generators, labels = [], []
    for p in range(1, n_modes + 1):
        generators.append(number(p, n_modes) * 1j)
        labels.append(f"iE[{p},{p}]")
    for p in range(1, n_modes + 1):
        for q in range(p + 1, n_modes + 1):
            forward, backward = excitation(p, q, n_modes), excitation(q, p, n_modes)
            generators.append((forward - backward) * 0.5)
            labels.append(f"kappa[{p},{q}]")
            generators.append((forward + backward) * 0.5j)
            labels.append(f"kappa'[{p},{q}]")
    return AlgebraBasis.from_generators(generators, range(n_modes), labels, kind='u')


def _so_generators(n_modes: int):
    gamma = [majorana(j, n_modes) for j in range(1, 2 * n_modes + 1)]
    generators, labels, csa = [], [], []
    for p in range(1, n_modes + 1):
        generators.append(gamma[2 * p - 2] * gamma[2 * p - 1] * 0.5)
        labels.append(f"S[{2 * p - 1},{2 * p}]")
        csa.append(len(generators) - 1)
    for j in range(1, 2 * n_modes + 1):
        for k in range(j + 1, 2 * n_modes + 1):
            if k == j + 1 and j % 2 == 1:
                continue
            generators.append(gamma[j - 1] * gamma[k - 1] * 0.5)
            labels.append(f"S[{j},{k}]")
    return gamma, generators, labels, csa


def so_even_basis(n_modes: int) -> AlgebraBasis:
    """so(2N): Ŝ_jk = γ̂_jγ̂_k/2，CSA = {γ̂_{2p−1}γ̂_{2p}/2}"""
    _, generators, labels, csa = _so_generators(n_modes)
    return AlgebraBasis.from_generators(generators, csa, labels, kind='so_even')


def so_odd_basis(n_modes: int) -> AlgebraBasis:
    """so(2N+1): so(2N) 再加上 Ŝ_j0 = −iγ̂_j/2，维数 2N²+N"""
    gamma, generators, labels, csa = _so_generators(n_modes)
    for j in range(1, 2 * n_modes + 1):
        generators.append(gamma[j - 1] * -0.5j)
        labels.append(f"S[{j},0]")
    return AlgebraBasis.from_generators(generators, csa, labels, kind='so_odd')


def qubit_basis(n_qubits: int) -> AlgebraBasis:
    """N 个 su(2) 的直和: {iẑ_k, ix̂_k, iŷ_k}，CSA = {iẑ_k}"""
    generators, labels = [], []
    for axis in "zxy":
        for k in range(1, n_qubits + 1):
            generators.append(pauli(axis, k, n_qubits) * 1j)
            labels.append(f"i{axis}[{k}]")
    return AlgebraBasis.from_generators(generators, range(n_qubits), labels, kind='qubit')


_STANDARD_BUILDERS = {
    'u': u_basis,
    'so_even': so_even_basis,
    'so_odd': so_odd_basis,
    'qubit': qubit_basis,
}

DEFAULT_KIND = {FERMIONIC: 'u', MAJORANA: 'so_even', PAULI: 'qubit'}


def standard_basis(kind: str, n_modes: int) -> AlgebraBasis:
    if kind not in _STANDARD_BUILDERS:
        raise UsageError(f"未知标准代数: {kind}（可选: {', '.join(_STANDARD_BUILDERS)}）")
    return _STANDARD_BUILDERS[kind](n_modes)


def default_basis(family: str, n_modes: int) -> AlgebraBasis:
    return standard_basis(DEFAULT_KIND[family], n_modes)


def csa_candidates(family: str, n_modes: int) -> List[Tuple[str, OperatorPolynomial]]:
    """各算符族的默认CSA候选元素"""
    if family == FERMIONIC:
        # u(N) 用 iÊ^p_p；so 型闭包中只有 i(1 − 2n̂_p)/2
        candidates = [(f"iE[{p},{p}]", number(p, n_modes) * 1j) for p in range(1, n_modes + 1)]
        return candidates + [(f"S[{2 * p - 1},{2 * p}]", (number(p, n_modes) * -1j) + 0.5j)
                             for p in range(1, n_modes + 1)]
    if family == MAJORANA:
        return [(f"S[{2 * p - 1},{2 * p}]", majorana(2 * p - 1, n_modes) * majorana(2 * p, n_modes) * 0.5)
                for p in range(1, n_modes + 1)]
    return [(f"iz[{k}]", pauli('z', k, n_modes) * 1j) for k in range(1, n_modes + 1)]


# ---------------------------------------------------------------------------
# 李闭包
# ---------------------------------------------------------------------------

class _SpanTracker:
    """实数域上的增量 Gram-Schmidt（系数以字典存储）"""

    def __init__(self, cutoff: float):
        self.cutoff = cutoff
        self.vectors: List[Dict] = []

    @staticmethod
    def _dot(a: Dict, b: Dict) -> float:
        if len(a) > len(b):
            a, b = b, a
        return sum((a[k].conjugate() * b[k]).real for k in a if k in b)

    def residual(self, poly: OperatorPolynomial) -> Dict:
        vector = dict(poly.terms)
        for _ in range(2):
            for basis_vector in self.vectors:
                overlap = self._dot(basis_vector, vector)
                if overlap:
                    for key, value in basis_vector.items():
                        vector[key] = vector.get(key, 0j) - overlap * value
        return vector

    def add(self, poly: OperatorPolynomial) -> Optional[OperatorPolynomial]:
        """线性无关时加入并返回归一化后的残差多项式，否则返回 None"""
        scale = poly.norm()
        if scale <= self.cutoff:
            return None
        vector = self.residual(poly)
        norm = np.sqrt(sum(abs(v) ** 2 for v in vector.values()))
        if norm <= self.cutoff * scale:
            return None
        vector = {k: v / norm for k, v in vector.items()}
        self.vectors.append(vector)
        return OperatorPolynomial(poly.family, poly.n_modes, vector)


def lie_closure(seed: Sequence[OperatorPolynomial], dimension_cap: Optional[int] = None,
                cutoff: Optional[float] = None) -> AlgebraBasis:
    """
    李闭包：不断加入线性无关的对易子直到闭合

    Args:
        seed: 反厄米种子算符
        dimension_cap: 维数上限（超出即视为指数爆炸）
        cutoff: 线性无关判据的奇异值阈值

    Returns:
        AlgebraBasis: 闭合基，CSA 元素排在最前

    Raises:
        ConstraintError: 种子不是反厄米算符
        DimensionCapError: 闭包维数超出上限
    """
    if not seed:
        raise UsageError("种子为空")
    dimension_cap = dimension_cap or int(TOLERANCES['closure_dimension_cap'])
    cutoff = cutoff or TOLERANCES['independence_cutoff']
    family = seed[0].family
    n_modes = max(s.n_modes for s in seed)
    for position, element in enumerate(seed, start=1):
        if element.family != family:
            raise UsageError("种子属于不同算符族")
        if not is_antihermitian(element):
            raise ConstraintError(f"种子第 {position} 个元素不是反厄米算符")

    tracker = _SpanTracker(cutoff)
    elements: List[OperatorPolynomial] = []
    for element in seed:
        added = tracker.add(element.with_modes(n_modes))
        if added is not None:
            elements.append(added)

    i = 0
    while i < len(elements):
        for j in range(i):
            added = tracker.add(commutator(elements[j], elements[i]))
            if added is not None:
                elements.append(added)
                if len(elements) > dimension_cap:
                    raise DimensionCapError(f"李闭包维数超过上限 {dimension_cap}")
        i += 1
    logger.debug(f"李闭包维数: {len(elements)}")

    provisional = AlgebraBasis.from_generators(elements)
    csa_polys, csa_labels = _default_csa(provisional, family, n_modes)

    tracker = _SpanTracker(cutoff)
    generators, labels = [], []
    for label, poly in zip(csa_labels, csa_polys):
        tracker.add(poly)
        generators.append(poly)
        labels.append(label)
    for element in elements:
        added = tracker.add(element)
        if added is not None:
            generators.append(added)
            labels.append(f"A[{len(generators) - len(csa_polys)}]")
    return AlgebraBasis.from_generators(generators, range(len(csa_polys)), labels)


def _default_csa(basis: AlgebraBasis, family: str, n_modes: int):
    """默认CSA：先取族的候选元素中落在代数内的部分，再贪心扩充到极大交换"""
    chosen_coords, chosen_polys, chosen_labels = [], [], []
    for label, candidate in csa_candidates(family, n_modes):
        try:
            coords = basis.coordinates(candidate)
        except ConstraintError:
            continue
        if all(np.max(np.abs(np.tensordot(coords, basis.ad_matrices, axes=(0, 0)) @ c)) < 1e-9
               for c in chosen_coords):
            chosen_coords.append(coords)
            chosen_polys.append(candidate)
            chosen_labels.append(label)

    while True:
        centralizer = basis.centralizer_of(chosen_coords)
        if chosen_coords:
            span = np.column_stack(chosen_coords)
            projector = span @ np.linalg.pinv(span)
            outside = centralizer - projector @ centralizer
        else:
            outside = centralizer
        norms = np.linalg.norm(outside, axis=0)
        if not len(norms) or np.max(norms) < 1e-8:
            break
        column = int(np.argmax(norms))
        coords = outside[:, column] / norms[column]
        chosen_coords.append(coords)
        chosen_polys.append(basis.element(coords))
        chosen_labels.append(f"C[{len(chosen_polys)}]")
    return chosen_polys, chosen_labels


# ---------------------------------------------------------------------------
# 升降算符
# ---------------------------------------------------------------------------

@dataclass
class LadderSet:
    """
    升降算符集合

    hermitian_csa[k] = −i Ĉ_k；roots[j, k] 满足 [hermitian_csa[k], raising[j]] = roots[j, k] raising[j]，
    lowering[j] 对应根 −roots[j]。
    """

    raising: List[OperatorPolynomial]
    lowering: List[OperatorPolynomial]
    roots: np.ndarray
    hermitian_csa: List[OperatorPolynomial] = field(default_factory=list)


def _normalize_ladder(poly: OperatorPolynomial) -> OperatorPolynomial:
    """最大系数（并列时取规范序最前的串）归一为实数1"""
    largest = max(abs(c) for _, c in poly.items())
    for key in sorted(poly.terms, key=lambda k: (len(k), k)):
        coeff = poly.coefficient(key)
        if abs(coeff) >= largest * (1 - 1e-9):
            return poly * (1.0 / coeff)
    return poly


def ladder_set(basis: AlgebraBasis, seed: int = 0) -> LadderSet:
    """
    对所有CSA元素的伴随作用同时对角化，得到升降算符与根矩阵

    Raises:
        ConstraintError: 基没有指定CSA，或CSA不是极大交换子代数
    """
    if not basis.csa_indices:
        raise ConstraintError("基没有指定CSA")
    r = basis.rank
    hermitian_ads = [-1j * basis.ad_matrices[k] for k in basis.csa_indices]
    weights = np.random.default_rng(seed).uniform(0.5, 1.5, size=r)
    combined = sum(w * ad for w, ad in zip(weights, hermitian_ads))
    values, vectors = np.linalg.eig(combined)

    zero_modes = int(np.sum(np.abs(values) < 1e-8))
    if zero_modes > r:
        raise ConstraintError(f"CSA不是极大交换子代数: 零根空间维数 {zero_modes} > {r}")

    hermitian_csa = [c * -1j for c in basis.csa]
    raising, lowering, roots = [], [], []
    for column in range(len(values)):
        if abs(values[column]) < 1e-8:
            continue
        vector = vectors[:, column]
        norm = np.vdot(vector, vector).real
        root = np.array([(np.vdot(vector, ad @ vector) / norm).real for ad in hermitian_ads])
        nonzero = np.flatnonzero(np.abs(root) > 1e-8)
        if root[nonzero[-1]] < 0:
            continue
        ladder = _normalize_ladder(basis.element(vector))
        for k, h in enumerate(hermitian_csa):
            if not (commutator(h, ladder) - ladder * root[k]).is_zero(1e-8):
                raise ConstraintError(f"升降算符校验失败: 根 {np.round(root, 6)}")
        raising.append(ladder)
        lowering.append(_normalize_ladder(adjoint(ladder)))
        half_integer = np.round(root * 2) / 2
        roots.append(half_integer if np.allclose(root, half_integer, atol=1e-8) else root)
    roots_array = np.array(roots) if roots else np.zeros((0, r))
    return LadderSet(raising=raising, lowering=lowering, roots=roots_array, hermitian_csa=hermitian_csa)


def algebra_summary(basis: AlgebraBasis) -> Dict:
    """闭包摘要（供命令行输出）"""
    return {
        'dimension': basis.dimension,
        'family': basis.family,
        'modes': basis.n_modes,
        'field': basis.field_flag,
        'max_imag_structure_constant': basis.imag_residual,
        'jacobi_residual': basis.jacobi_residual(),
        'csa': [basis.labels[k] for k in basis.csa_indices],
        'csa_operators': [to_text(basis.generators[k]).strip() for k in basis.csa_indices],
        'labels': list(basis.labels),
    }
