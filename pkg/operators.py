#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 算符多项式代数
功能：费米子 / Majorana / Pauli 三类算符多项式的规范序、乘法、对易子、
      厄米共轭、Majorana变换、Jordan-Wigner变换以及文本格式读写
"""

from __future__ import annotations

import re
from collections import defaultdict
from functools import lru_cache
from types import MappingProxyType
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import TOLERANCES
from errors import ParseError, UsageError

FERMIONIC = "fermionic"
MAJORANA = "majorana"
PAULI = "pauli"
FAMILIES = (FERMIONIC, MAJORANA, PAULI)

# Pauli单比特乘法表: (左, 右) -> (相位, 结果)
_PAULI_TABLE = {
    ('x', 'y'): (1j, 'z'), ('y', 'x'): (-1j, 'z'),
    ('y', 'z'): (1j, 'x'), ('z', 'y'): (-1j, 'x'),
    ('z', 'x'): (1j, 'y'), ('x', 'z'): (-1j, 'y'),
}


def _fermion_rank(factor):
    """规范序: 产生算符在前，同类按模式编号降序"""
    mode, dagger = factor
    return (0, -mode) if dagger else (1, -mode)


@lru_cache(maxsize=200000)
def _order_fermionic(factors):
    """费米子算符串的规范序（CAR交换带符号，同模式 a a† 产生收缩项）"""
    result = defaultdict(int)
    stack = [(list(factors), 1)]
    while stack:
        term, sign = stack.pop()
        for i in range(1, len(term)):
            j = i
            while j > 0 and _fermion_rank(term[j]) < _fermion_rank(term[j - 1]):
                left, right = term[j - 1], term[j]
                if left[0] == right[0]:
                    # a_p a_p† = 1 - a_p† a_p
                    stack.append((term[:j - 1] + term[j + 1:], sign))
                term[j - 1], term[j] = right, left
                sign = -sign
                j -= 1
        if any(term[k] == term[k + 1] for k in range(len(term) - 1)):
            continue
        result[tuple(term)] += sign
    return tuple((key, value) for key, value in result.items() if value != 0)


@lru_cache(maxsize=200000)
def _order_majorana(factors):
    """Majorana串: 升序排列并消去 γγ = 1"""
    term = list(factors)
    sign = 1
    for i in range(1, len(term)):
        j = i
        while j > 0 and term[j] < term[j - 1]:
            term[j - 1], term[j] = term[j], term[j - 1]
            sign = -sign
            j -= 1
    reduced: List[int] = []
    for index in term:
        if reduced and reduced[-1] == index:
            reduced.pop()
        else:
            reduced.append(index)
    return ((tuple(reduced), sign),)


@lru_cache(maxsize=200000)
def _order_pauli(factors):
    """Pauli串: 每个比特最多一个轴，比特编号升序"""
    per_qubit: Dict[int, Optional[str]] = {}
    phase = 1
    for qubit, axis in factors:
        current = per_qubit.get(qubit)
        if current is None:
            per_qubit[qubit] = axis
        elif current == axis:
            per_qubit[qubit] = None
        else:
            factor_phase, per_qubit[qubit] = _PAULI_TABLE[(current, axis)]
            phase *= factor_phase
    key = tuple(sorted((q, a) for q, a in per_qubit.items() if a is not None))
    return ((key, phase),)


_ORDERING = {FERMIONIC: _order_fermionic, MAJORANA: _order_majorana, PAULI: _order_pauli}


def normal_order(family: str, factors: Sequence) -> Tuple:
    """把任意因子序列化为规范形式，返回 ((key, 系数), ...)"""
    return _ORDERING[family](tuple(factors))


def _check_family(family: str):
    if family not in FAMILIES:
        raise UsageError(f"未知算符族: {family}")


class OperatorPolynomial:
    """
    算符多项式：规范算符串 -> 复系数

    构造后不可变；所有算术运算返回新对象。|系数| < 1e-12 的项在构造时丢弃。
    """

    __slots__ = ("family", "n_modes", "_terms")

    def __init__(self, family: str, n_modes: int, terms: Optional[Dict] = None,
                 cutoff: Optional[float] = None):
        _check_family(family)
        cutoff = TOLERANCES['coefficient_cutoff'] if cutoff is None else cutoff
        self.family = family
        self.n_modes = int(n_modes)
        clean = {}
        for key, coeff in (terms or {}).items():
            coeff = complex(coeff)
            if abs(coeff) > cutoff:
                clean[tuple(key)] = coeff
        self._terms = clean

    # ---- 构造 ----
    @classmethod
    def from_products(cls, family: str, n_modes: int, products: Iterable[Tuple[Sequence, complex]]):
        """由 (因子列表, 系数) 构造，自动规范序并合并同类项"""
        _check_family(family)
        accumulated = defaultdict(complex)
        for factors, coeff in products:
            for key, sign in normal_order(family, factors):
                accumulated[key] += coeff * sign
        return cls(family, n_modes, accumulated)

    @classmethod
    def constant(cls, value: complex, family: str, n_modes: int):
        return cls(family, n_modes, {(): value})

    @classmethod
    def zero(cls, family: str, n_modes: int):
        return cls(family, n_modes, {})

    # ---- 访问 ----
    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, key) -> complex:
        return self._terms.get(tuple(key), 0j)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def is_zero(self, tol: Optional[float] = None) -> bool:
        tol = TOLERANCES['coefficient_cutoff'] if tol is None else tol
        return all(abs(c) <= tol for c in self._terms.values())

    def norm(self) -> float:
        """系数的2-范数"""
        return float(np.sqrt(sum(abs(c) ** 2 for c in self._terms.values())))

    def degree(self) -> int:
        """最长算符串的长度"""
        return max((len(key) for key in self._terms), default=0)

    def max_index(self) -> int:
        indices = [_factor_index(self.family, f) for key in self._terms for f in key]
        return max(indices, default=0)

    def allclose(self, other: "OperatorPolynomial", atol: float = 1e-10) -> bool:
        if self.family != other.family:
            return False
        return (self - other).is_zero(atol)

    def __eq__(self, other):
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return self.allclose(other)

    __hash__ = None

    # ---- 算术 ----
    def _coerce(self, other) -> "OperatorPolynomial":
        if isinstance(other, OperatorPolynomial):
            if other.family != self.family:
                raise UsageError(f"算符族不一致: {self.family} 与 {other.family}")
            return other
        return OperatorPolynomial.constant(other, self.family, self.n_modes)

    def __add__(self, other):
        other = self._coerce(other)
        terms = defaultdict(complex, self._terms)
        for key, coeff in other._terms.items():
            terms[key] += coeff
        return OperatorPolynomial(self.family, max(self.n_modes, other.n_modes), terms)

    __radd__ = __add__

    def __neg__(self):
        return OperatorPolynomial(self.family, self.n_modes, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            return multiply(self, other)
        return OperatorPolynomial(self.family, self.n_modes, {k: c * other for k, c in self._terms.items()})

    def __rmul__(self, other):
        if isinstance(other, OperatorPolynomial):
            return multiply(other, self)
        return self * other

    def __truediv__(self, value):
        return self * (1.0 / value)

    def __pow__(self, power: int):
        result = OperatorPolynomial.constant(1.0, self.family, self.n_modes)
        for _ in range(power):
            result = multiply(result, self)
        return result

    def with_modes(self, n_modes: int) -> "OperatorPolynomial":
        return OperatorPolynomial(self.family, n_modes, self._terms)

    def __repr__(self):
        text = to_text(self).strip().replace("\n", " | ")
        return f"OperatorPolynomial({self.family}, N={self.n_modes}: {text or '0'})"


# ---------------------------------------------------------------------------
# 基本算符
# ---------------------------------------------------------------------------

def creation(p: int, n_modes: int) -> OperatorPolynomial:
    return OperatorPolynomial(FERMIONIC, n_modes, {((p, 1),): 1.0})


def annihilation(p: int, n_modes: int) -> OperatorPolynomial:
    return OperatorPolynomial(FERMIONIC, n_modes, {((p, 0),): 1.0})


def excitation(p: int, q: int, n_modes: int) -> OperatorPolynomial:
    """Ê^p_q = â_p† â_q"""
    return OperatorPolynomial.from_products(FERMIONIC, n_modes, [(((p, 1), (q, 0)), 1.0)])


def number(p: int, n_modes: int) -> OperatorPolynomial:
    return excitation(p, p, n_modes)


def majorana(j: int, n_modes: int) -> OperatorPolynomial:
    return OperatorPolynomial(MAJORANA, n_modes, {(j,): 1.0})


def pauli(axis: str, qubit: int, n_qubits: int) -> OperatorPolynomial:
    if axis not in "xyz":
        raise UsageError(f"未知Pauli轴: {axis}")
    return OperatorPolynomial(PAULI, n_qubits, {((qubit, axis),): 1.0})


def identity(family: str, n_modes: int) -> OperatorPolynomial:
    return OperatorPolynomial.constant(1.0, family, n_modes)


# ---------------------------------------------------------------------------
# 代数运算
# ---------------------------------------------------------------------------

def multiply(p: OperatorPolynomial, q: OperatorPolynomial) -> OperatorPolynomial:
    """
    规范形式下的乘积

    Raises:
        UsageError: 两个多项式属于不同算符族
    """
    if p.family != q.family:
        raise UsageError(f"算符族不一致: {p.family} 与 {q.family}")
    ordering = _ORDERING[p.family]
    accumulated = defaultdict(complex)
    for left, c_left in p.items():
        for right, c_right in q.items():
            for key, sign in ordering(left + right):
                accumulated[key] += c_left * c_right * sign
    return OperatorPolynomial(p.family, max(p.n_modes, q.n_modes), accumulated)


def commutator(p: OperatorPolynomial, q: OperatorPolynomial) -> OperatorPolynomial:
    return multiply(p, q) - multiply(q, p)


def anticommutator(p: OperatorPolynomial, q: OperatorPolynomial) -> OperatorPolynomial:
    return multiply(p, q) + multiply(q, p)


def adjoint(p: OperatorPolynomial) -> OperatorPolynomial:
    """逐项厄米共轭并重新规范序"""
    if p.family == PAULI:
        return OperatorPolynomial(PAULI, p.n_modes, {k: c.conjugate() for k, c in p.items()})
    if p.family == FERMIONIC:
        products = [([(m, 1 - d) for m, d in reversed(key)], c.conjugate()) for key, c in p.items()]
    else:
        products = [(list(reversed(key)), c.conjugate()) for key, c in p.items()]
    return OperatorPolynomial.from_products(p.family, p.n_modes, products)


def is_hermitian(p: OperatorPolynomial, tol: float = 1e-10) -> bool:
    return (adjoint(p) - p).is_zero(tol)


def is_antihermitian(p: OperatorPolynomial, tol: float = 1e-10) -> bool:
    return (adjoint(p) + p).is_zero(tol)


def substitute(p: OperatorPolynomial, image: Callable[[object], OperatorPolynomial],
               family: str, n_modes: int) -> OperatorPolynomial:
    """把每个基本因子替换为 image(factor) 并重新相乘（代数同态的通用实现）"""
    cache: Dict[object, OperatorPolynomial] = {}
    result = OperatorPolynomial.zero(family, n_modes)
    for key, coeff in p.items():
        term = OperatorPolynomial.constant(coeff, family, n_modes)
        for factor in key:
            if factor not in cache:
                cache[factor] = image(factor)
            term = multiply(term, cache[factor])
        result = result + term
    return result


# ---------------------------------------------------------------------------
# Majorana 与 Jordan-Wigner 变换
# ---------------------------------------------------------------------------

def majorana_from_fermionic(p: OperatorPolynomial) -> OperatorPolynomial:
    """
    费米子 -> Majorana: γ_{2p-1} = i(a_p - a_p†), γ_{2p} = a_p + a_p†

    即 a_p = (γ_{2p} - iγ_{2p-1})/2, a_p† = (γ_{2p} + iγ_{2p-1})/2，
    Clifford 归一化 {γ_j, γ_k} = 2δ_jk
    """
    if p.family != FERMIONIC:
        raise UsageError(f"需要费米子多项式，实际为 {p.family}")
    n = p.n_modes

    def image(factor):
        mode, dagger = factor
        phase = 0.5j if dagger else -0.5j
        return OperatorPolynomial(MAJORANA, n, {(2 * mode,): 0.5, (2 * mode - 1,): phase})

    return substitute(p, image, MAJORANA, n)


def fermionic_from_majorana(p: OperatorPolynomial) -> OperatorPolynomial:
    """Majorana -> 费米子（majorana_from_fermionic 的逆映射）"""
    if p.family != MAJORANA:
        raise UsageError(f"需要Majorana多项式，实际为 {p.family}")
    n = p.n_modes

    def image(index):
        mode = (index + 1) // 2
        if index % 2:
            return OperatorPolynomial(FERMIONIC, n, {((mode, 0),): 1j, ((mode, 1),): -1j})
        return OperatorPolynomial(FERMIONIC, n, {((mode, 0),): 1.0, ((mode, 1),): 1.0})

    return substitute(p, image, FERMIONIC, n)


def jordan_wigner(p: OperatorPolynomial) -> OperatorPolynomial:
    """
    Jordan-Wigner 映射: a_p -> ½(x_p + i y_p) z_1…z_{p-1}

    z = diag(1, -1)，占据态对应 z = -1，因此 n_p -> (1 - z_p)/2。
    Majorana 多项式先转换为费米子多项式。
    """
    if p.family == MAJORANA:
        p = fermionic_from_majorana(p)
    if p.family != FERMIONIC:
        raise UsageError(f"Jordan-Wigner 需要费米子多项式，实际为 {p.family}")
    n = p.n_modes

    def image(factor):
        mode, dagger = factor
        string = tuple((k, 'z') for k in range(1, mode))
        y_phase = -0.5j if dagger else 0.5j
        return OperatorPolynomial(PAULI, n, {
            string + ((mode, 'x'),): 0.5,
            string + ((mode, 'y'),): y_phase,
        })

    return substitute(p, image, PAULI, n)


# ---------------------------------------------------------------------------
# 文本格式
# ---------------------------------------------------------------------------

_FERMION_TOKEN = re.compile(r'^(\d+)(\^?)$')
_MAJORANA_TOKEN = re.compile(r'^g(\d+)$')
_PAULI_TOKEN = re.compile(r'^([xyz])(\d+)$')


def _factor_index(family, factor) -> int:
    if family == FERMIONIC:
        return factor[0]
    if family == MAJORANA:
        return (factor + 1) // 2
    return factor[0]


def format_factor(family: str, factor) -> str:
    if family == FERMIONIC:
        return f"{factor[0]}^" if factor[1] else f"{factor[0]}"
    if family == MAJORANA:
        return f"g{factor}"
    return f"{factor[1]}{factor[0]}"


def format_key(family: str, key) -> str:
    return " ".join(format_factor(family, f) for f in key)


def format_complex(value: complex) -> str:
    """最短可回读的复数文本，如 0.5、-0.25i、1.0+2.0i"""
    real = float(value.real) + 0.0
    imag = float(value.imag) + 0.0
    if imag == 0.0:
        return repr(real)
    if real == 0.0:
        return f"{imag!r}i"
    sign = "+" if imag >= 0 else ""
    return f"{real!r}{sign}{imag!r}i"


def parse_complex(text: str) -> complex:
    """解析 a+bi 形式的复系数"""
    body = text.replace(" ", "")
    if not body:
        raise ValueError("空系数")
    if body[-1] not in "ij":
        return complex(float(body), 0.0)
    body = body[:-1]
    split = None
    for position in range(len(body) - 1, 0, -1):
        if body[position] in "+-" and body[position - 1] not in "eE":
            split = position
            break
    real_text, imag_text = ("", body) if split is None else (body[:split], body[split:])
    if imag_text in ("", "+"):
        imag = 1.0
    elif imag_text == "-":
        imag = -1.0
    else:
        imag = float(imag_text)
    real = float(real_text) if real_text else 0.0
    return complex(real, imag)


def _parse_factor(token: str, line_number: int):
    match = _FERMION_TOKEN.match(token)
    if match:
        return FERMIONIC, (int(match.group(1)), 1 if match.group(2) else 0)
    match = _MAJORANA_TOKEN.match(token)
    if match:
        return MAJORANA, int(match.group(1))
    match = _PAULI_TOKEN.match(token)
    if match:
        return PAULI, (int(match.group(2)), match.group(1))
    raise ParseError(f"无法识别的因子 '{token}'", line_number)


def parse_polynomial(text: str, family: Optional[str] = None,
                     n_modes: Optional[int] = None) -> OperatorPolynomial:
    """
    解析文本格式的算符多项式

    每行一项: `<复系数> : <因子> <因子> ...`；`3^` 产生算符，`3` 湮灭算符，
    `g5` Majorana，`x2|y2|z2` Pauli；`#` 之后为注释。

    Args:
        text: 文本内容
        family: 期望的算符族（None 表示从因子推断）
        n_modes: 声明的模式/比特数（None 表示取最大编号）

    Returns:
        OperatorPolynomial: 规范化后的多项式

    Raises:
        ParseError: 语法错误、算符族混用、编号为0或超出声明的 N
    """
    products = []
    detected = family
    max_index = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if ':' not in line:
            raise ParseError("缺少 ':' 分隔符", line_number)
        coeff_text, factor_text = line.split(':', 1)
        try:
            coeff = parse_complex(coeff_text.strip())
        except ValueError:
            raise ParseError(f"系数格式错误 '{coeff_text.strip()}'", line_number)
        factors = []
        for token in factor_text.split():
            token_family, factor = _parse_factor(token, line_number)
            if detected is None:
                detected = token_family
            elif token_family != detected:
                raise ParseError(f"算符族混用: {token} 不属于 {detected}", line_number)
            index = factor if token_family == MAJORANA else factor[0]
            if index < 1:
                raise ParseError(f"编号必须从1开始: {token}", line_number)
            bound_index = _factor_index(token_family, factor)
            if n_modes is not None and bound_index > n_modes:
                raise ParseError(f"编号 {token} 超出声明的 N={n_modes}", line_number)
            max_index = max(max_index, bound_index)
            factors.append(factor)
        products.append((factors, coeff, line_number))
    detected = detected or FERMIONIC
    modes = n_modes if n_modes is not None else max(max_index, 1)
    return OperatorPolynomial.from_products(detected, modes, [(f, c) for f, c, _ in products])


def _sort_key(item):
    key, _ = item
    return (len(key), key)


def to_text(p: OperatorPolynomial) -> str:
    """输出规范文本（按串长度、再按串本身排序，确定性输出）"""
    lines = []
    for key, coeff in sorted(p.items(), key=_sort_key):
        factors = format_key(p.family, key)
        lines.append(f"{format_complex(coeff)} : {factors}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# 线性代数辅助
# ---------------------------------------------------------------------------

def coefficient_matrix(polys: Sequence[OperatorPolynomial], keys: Optional[List] = None):
    """
    把多项式列表排成复系数矩阵（行: 算符串，列: 多项式）

    Returns:
        (keys, matrix): 行对应的算符串列表与 complex ndarray
    """
    if keys is None:
        seen = {}
        for poly in polys:
            for key in poly.terms:
                seen.setdefault(key, len(seen))
        keys = list(seen)
    index = {key: i for i, key in enumerate(keys)}
    matrix = np.zeros((len(keys), len(polys)), dtype=complex)
    for column, poly in enumerate(polys):
        for key, coeff in poly.items():
            if key not in index:
                raise UsageError("多项式包含未登记的算符串")
            matrix[index[key], column] = coeff
    return keys, matrix


def from_coefficients(keys: Sequence, vector: np.ndarray, family: str, n_modes: int) -> OperatorPolynomial:
    return OperatorPolynomial(family, n_modes, {key: c for key, c in zip(keys, vector)})


def random_polynomial(family: str, n_modes: int, rng: np.random.Generator,
                      n_terms: int = 4, max_degree: int = 4, hermitian: bool = False) -> OperatorPolynomial:
    """随机多项式（测试与示例用）"""
    products = []
    for _ in range(n_terms):
        length = int(rng.integers(0, max_degree + 1))
        if family == FERMIONIC:
            factors = [(int(rng.integers(1, n_modes + 1)), int(rng.integers(0, 2))) for _ in range(length)]
        elif family == MAJORANA:
            factors = [int(rng.integers(1, 2 * n_modes + 1)) for _ in range(length)]
        else:
            factors = [(int(rng.integers(1, n_modes + 1)), "xyz"[int(rng.integers(0, 3))]) for _ in range(length)]
        products.append((factors, complex(rng.normal(), rng.normal())))
    poly = OperatorPolynomial.from_products(family, n_modes, products)
    if hermitian:
        poly = (poly + adjoint(poly)) * 0.5
    return poly
