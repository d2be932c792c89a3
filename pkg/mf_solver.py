#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 命令行入口
功能：parse / generate / classify / solve / verify / jw / closure 七个子命令，
      文件读写、可复现的出处信息头、按错误类别区分的退出码
"""

import argparse
import hashlib
import json
import os
import sys
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from builder import (ClassSpec, build_class_k, build_class_matrix, random_class_spec)
from config import VERSION, RunConfig
from detector import classify
from errors import ConstraintError, MeanFieldError, UsageError
from lie_algebra import STANDARD_KINDS, algebra_summary, default_basis, lie_closure, standard_basis
from log_utils import get_logger, set_verbosity
from matrix_rep import (exact_eigensystem, has_definite_number, matrix_distance, mf_state_check,
                        operator_norm, particle_numbers, to_matrix)
from operators import PAULI, OperatorPolynomial, jordan_wigner, parse_polynomial, to_text

logger = get_logger("cli")


# ---------------------------------------------------------------------------
# 文件读写
# ---------------------------------------------------------------------------

def _read_text(path: str) -> str:
    if not path or not os.path.exists(path):
        raise UsageError(f"输入文件不存在: {path}")
    with open(path, 'r', encoding='utf-8') as handle:
        return handle.read()


def _read_json(path: str) -> Dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"JSON 格式错误 {path}: {exc}")


def _file_sha256(path: str) -> str:
    with open(path, 'rb') as handle:
        return hashlib.sha256(handle.read()).hexdigest()


def _emit(text: str, path: Optional[str]):
    """写入 --out 指定的文件，否则输出到标准输出"""
    if path:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(text)
        print(f"✅ 已写入: {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _header(config: RunConfig, **extra) -> str:
    """文本输出的出处信息头（注释行，解析时忽略）"""
    items = dict(config.provenance())
    items.update(extra)
    return "".join(f"# {key}: {value}\n" for key, value in items.items())


def _load_hamiltonian(config: RunConfig) -> OperatorPolynomial:
    return parse_polynomial(_read_text(config.input_path), config.family, config.modes)


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------

def cmd_parse(config: RunConfig) -> int:
    """规范化并回显算符多项式"""
    poly = _load_hamiltonian(config)
    logger.info(f"解析完成: {poly.family}，N={poly.n_modes}，{len(poly)} 项")
    _emit(_header(config, family=poly.family, modes=poly.n_modes, terms=len(poly)) + to_text(poly),
          config.output_path)
    return 0


def cmd_generate(config: RunConfig, random_class: Optional[int] = None) -> int:
    """由 ClassSpec 构造哈密顿量（或生成随机第 K 类哈密顿量）"""
    if random_class is not None:
        if config.family is None or config.modes is None:
            raise UsageError("--random 需要同时给出 --family 与 --modes")
        spec = random_class_spec(config.family, config.modes, random_class, config.rng())
        source = f"random(K={random_class})"
    else:
        spec = ClassSpec.from_dict(_read_json(config.spec_path))
        source = _file_sha256(config.spec_path)
    hamiltonian = build_class_k(spec)
    print(f"📊 构造第 {spec.K} 类哈密顿量: {spec.family}，N={spec.n_modes}，{len(hamiltonian)} 项", file=sys.stderr)
    header = _header(config, family=spec.family, modes=spec.n_modes, spec_sha256=source, **{'class': spec.K})
    _emit(header + to_text(hamiltonian), config.output_path)
    return 0


def cmd_classify(config: RunConfig, algebra: Optional[str] = None) -> int:
    """判定平均场可解性，输出 JSON 报告；结论不确定时退出码为 5"""
    hamiltonian = _load_hamiltonian(config)
    n_modes = max(hamiltonian.n_modes, 1)
    basis = standard_basis(algebra, n_modes) if algebra else default_basis(hamiltonian.family, n_modes)
    report = classify(hamiltonian, basis, budget=config.budget, seed=config.seed,
                      tol_variance=config.tol('zero_variance'), optimizer=config.optimizer,
                      progress=config.progress)
    document = {'provenance': dict(config.provenance(), input_sha256=_file_sha256(config.input_path))}
    document.update(json.loads(report.to_json()))
    _emit(json.dumps(document, ensure_ascii=False, indent=2) + "\n", config.output_path)

    print(f"📊 判定结果: {report.describe()}", file=sys.stderr)
    if report.verdict == 'inconclusive':
        print(f"⚠️ 结论不确定: {'; '.join(report.notes)}", file=sys.stderr)
        return 5
    if report.optimizer_limited:
        print("⚠️ 结论受限于优化器（非凸地形）", file=sys.stderr)
    return 0


def eigen_table(hamiltonian: OperatorPolynomial) -> pd.DataFrame:
    """精确本征表：能量、简并度、粒子数、平均场判据"""
    n_modes = max(hamiltonian.n_modes, 1)
    system = exact_eigensystem(to_matrix(hamiltonian, n_modes))
    numbers = particle_numbers(n_modes)
    rows = []
    for group in system.groups:
        for index in group:
            vector = system.vectors[:, index]
            row = {'index': index, 'energy': float(system.values[index]), 'degeneracy': len(group)}
            if hamiltonian.family != PAULI:
                row['particle_number'] = (int(numbers[np.argmax(np.abs(vector))])
                                          if has_definite_number(vector, n_modes) else None)
            if len(group) == 1:
                check = mf_state_check(vector, hamiltonian.family, n_modes, normalize=True)
                row.update({'criterion': check.criterion, 'mf_error': check.error, 'is_mf': check.is_mf})
            else:
                row.update({'criterion': None, 'mf_error': None, 'is_mf': None})
            rows.append(row)
    return pd.DataFrame(rows)


def cmd_solve(config: RunConfig) -> int:
    """精确对角化，输出本征表（.csv / .xlsx / 标准输出）"""
    hamiltonian = _load_hamiltonian(config)
    table = eigen_table(hamiltonian)
    path = config.output_path
    if path and path.lower().endswith('.xlsx'):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        table.to_excel(path, index=False, engine='openpyxl')
        print(f"✅ 已写入: {path}", file=sys.stderr)
    elif path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        table.to_csv(path, index=False, encoding='utf-8-sig')
        print(f"✅ 已写入: {path}", file=sys.stderr)
    else:
        sys.stdout.write(table.to_csv(index=False))
    mf_count = int(table['is_mf'].fillna(False).astype(bool).sum())
    print(f"📊 {len(table)} 个本征态，非简并且为平均场态的 {mf_count} 个", file=sys.stderr)
    return 0


def cmd_verify(config: RunConfig) -> int:
    """比较哈密顿量文件与 ClassSpec（或判定报告中的 spec）的矩阵距离"""
    hamiltonian = _load_hamiltonian(config)
    document = _read_json(config.spec_path)
    if 'verdict' in document:
        document = document.get('spec') or {}
    if 'levels' not in document:
        raise UsageError("文件中没有 ClassSpec（判定结论不是第 K 类时报告不含 spec）")
    spec = ClassSpec.from_dict(document)
    if spec.family != hamiltonian.family:
        raise UsageError(f"算符族不一致: {hamiltonian.family} 与 {spec.family}")
    matrix = to_matrix(hamiltonian, spec.n_modes).matrix
    distance = matrix_distance(build_class_matrix(spec), matrix)
    scale = max(operator_norm(matrix), 1.0)
    tolerance = config.tol('reconstruction') * scale
    result = {'provenance': config.provenance(), 'distance': distance, 'tolerance': tolerance,
              'class': spec.K, 'passed': distance <= tolerance}
    _emit(json.dumps(result, ensure_ascii=False, indent=2) + "\n", config.output_path)
    if distance > tolerance:
        raise ConstraintError(f"校验失败: 矩阵距离 {distance:.3e} > {tolerance:.3e}")
    print(f"✅ 校验通过: 矩阵距离 {distance:.3e}", file=sys.stderr)
    return 0


def cmd_jw(config: RunConfig) -> int:
    """费米子/Majorana 多项式 → Pauli 多项式"""
    poly = _load_hamiltonian(config)
    if poly.family == PAULI:
        raise UsageError("输入已经是 Pauli 多项式")
    mapped = jordan_wigner(poly)
    _emit(_header(config, family=PAULI, modes=mapped.n_modes, terms=len(mapped)) + to_text(mapped),
          config.output_path)
    return 0


def split_generators(text: str) -> List[str]:
    """生成元文件: 各生成元之间用单独一行 --- 分隔"""
    blocks, current = [], []
    for line in text.splitlines():
        if line.strip() == '---':
            blocks.append("\n".join(current))
            current = []
        else:
            current.append(line)
    blocks.append("\n".join(current))
    return [block for block in blocks if any(line.split('#', 1)[0].strip() for line in block.splitlines())]


def cmd_closure(config: RunConfig) -> int:
    """李闭包摘要: 维数、结构常数虚部残差、CSA"""
    blocks = split_generators(_read_text(config.input_path))
    if not blocks:
        raise UsageError("生成元文件为空")
    seeds = [parse_polynomial(block, config.family, config.modes) for block in blocks]
    n_modes = max(config.modes or 0, max(s.n_modes for s in seeds))
    seeds = [s.with_modes(n_modes) for s in seeds]
    basis = lie_closure(seeds, dimension_cap=int(config.tol('closure_dimension_cap')))
    summary = algebra_summary(basis)
    _emit(json.dumps({'provenance': config.provenance(), **summary}, ensure_ascii=False, indent=2) + "\n",
          config.output_path)
    print(f"📊 闭包维数 {basis.dimension}，max|Im ξ| = {basis.imag_residual:.2e}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# 参数解析
# ---------------------------------------------------------------------------

def _common(parser: argparse.ArgumentParser):
    parser.add_argument('--family', choices=['fermionic', 'majorana', 'pauli'], help='算符族（缺省从文件推断）')
    parser.add_argument('--modes', type=int, help='模式/比特数 N')
    parser.add_argument('--seed', type=int, default=0, help='随机种子（决定全部随机行为）')
    parser.add_argument('--out', help='输出文件（缺省为标准输出）')
    parser.add_argument('--config', help='JSON 覆盖文件（tolerances / optimizer）')
    parser.add_argument('--verbose', action='store_true', help='输出调试日志')
    parser.add_argument('--quiet', action='store_true', help='只输出错误')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='mf_solver', description='平均场可解性分析工具')
    parser.add_argument('--version', action='version', version=f"mf_solver {VERSION}")
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('parse', help='规范化算符文本')
    p.add_argument('input')
    _common(p)

    p = sub.add_parser('generate', help='由 ClassSpec 构造哈密顿量')
    p.add_argument('spec', nargs='?')
    p.add_argument('--random', type=int, metavar='K', help='生成随机第 K 类哈密顿量（需 --family --modes）')
    _common(p)

    p = sub.add_parser('classify', help='判定平均场可解性')
    p.add_argument('input')
    p.add_argument('--algebra', choices=sorted(STANDARD_KINDS), help='平均场代数（缺省按算符族）')
    p.add_argument('--budget', type=int, help='每层重启次数')
    p.add_argument('--tol-variance', dest='tol_variance', type=float, help='零方差容差（相对 ‖H‖²）')
    p.add_argument('--progress', action='store_true', help='显示进度条')
    _common(p)

    p = sub.add_parser('solve', help='精确对角化并输出本征表')
    p.add_argument('input')
    _common(p)

    p = sub.add_parser('verify', help='校验哈密顿量与 ClassSpec 一致')
    p.add_argument('input')
    p.add_argument('spec')
    _common(p)

    p = sub.add_parser('jw', help='Jordan-Wigner 变换')
    p.add_argument('input')
    _common(p)

    p = sub.add_parser('closure', help='李闭包')
    p.add_argument('input')
    _common(p)
    return parser


COMMANDS = {
    'parse': cmd_parse,
    'solve': cmd_solve,
    'verify': cmd_verify,
    'jw': cmd_jw,
    'closure': cmd_closure,
}


def main(argv: Optional[List[str]] = None) -> int:
    """主函数，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if not args.command:
        parser.print_help()
        return 1
    set_verbosity(args.verbose, args.quiet)

    try:
        config = RunConfig.from_args(args)
        with config.applied():
            if args.command == 'generate':
                if args.spec is None and args.random is None:
                    raise UsageError("generate 需要 ClassSpec 文件或 --random K")
                return cmd_generate(config, args.random)
            if args.command == 'classify':
                return cmd_classify(config, args.algebra)
            return COMMANDS[args.command](config)
    except MeanFieldError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
