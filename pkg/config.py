#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 配置
功能：数值容差与优化器参数的默认值，以及命令行运行配置 RunConfig
"""

from __future__ import annotations

import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterator, Mapping, Optional

import numpy as np

from errors import UsageError

VERSION = "1.0.0"

FAMILIES = ("fermionic", "majorana", "pauli")


def get_default_tolerances() -> Dict[str, float]:
    """获取默认数值容差（支持通过 --config 覆盖）"""
    return {
        'coefficient_cutoff': 1e-12,
        'independence_cutoff': 1e-10,
        'structure_reality': 1e-10,
        'closure_dimension_cap': 512,
        'oracle_mode_cap': 14,
        'degeneracy': 1e-8,
        'eigen_residual': 1e-9,
        'normalization': 1e-10,
        'idempotency': 1e-8,
        'purity': 1e-8,
        'zero_variance': 1e-8,
        'reconstruction': 1e-8,
        'bogoliubov': 1e-8,
        'car': 1e-10,
        'commutation': 1e-10,
        'maximal_tori': 1e-8,
    }


# 各模块共用同一份容差表；命令行运行期间由 RunConfig.applied() 临时覆盖
TOLERANCES: Dict[str, float] = get_default_tolerances()


@contextmanager
def tolerance_overrides(values: Mapping[str, float]) -> Iterator[Dict[str, float]]:
    """在 with 块内替换容差表，退出时恢复"""
    unknown = set(values) - set(TOLERANCES)
    if unknown:
        raise UsageError(f"未知容差项: {', '.join(sorted(unknown))}")
    saved = dict(TOLERANCES)
    TOLERANCES.update(values)
    try:
        yield TOLERANCES
    finally:
        TOLERANCES.clear()
        TOLERANCES.update(saved)


def get_default_optimizer() -> Dict[str, Any]:
    """获取默认优化器参数"""
    return {
        'budget': 32,
        'tori_restarts': 16,
        'seed_restarts': 8,
        'growth_restarts': 4,
        'gradient': 'analytic',
        'fd_step': 1e-6,
        'gtol': 1e-12,
        'maxiter': 2000,
        'variance_maxiter': 600,
    }


@dataclass
class RunConfig:
    """一次命令行运行的完整配置"""

    command: str = ""
    input_path: Optional[str] = None
    spec_path: Optional[str] = None
    output_path: Optional[str] = None
    family: Optional[str] = None
    modes: Optional[int] = None
    seed: int = 0
    tolerances: Dict[str, float] = field(default_factory=get_default_tolerances)
    optimizer: Dict[str, Any] = field(default_factory=get_default_optimizer)
    progress: bool = False

    def __post_init__(self):
        if self.family is not None and self.family not in FAMILIES:
            raise UsageError(f"未知算符族: {self.family}（可选: {', '.join(FAMILIES)}）")
        if self.modes is not None and self.modes < 1:
            raise UsageError(f"模式数必须为正整数: {self.modes}")

    @property
    def budget(self) -> int:
        return int(self.optimizer['budget'])

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def rng(self) -> np.random.Generator:
        """由 seed 决定全部随机行为"""
        return np.random.default_rng(self.seed)

    def applied(self):
        """让本配置的容差对全部模块生效（with 语句）"""
        return tolerance_overrides(self.tolerances)

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        """合并覆盖项，未知键直接报错"""
        tolerances = dict(self.tolerances)
        optimizer = dict(self.optimizer)
        for key, value in overrides.get('tolerances', {}).items():
            if key not in tolerances:
                raise UsageError(f"未知容差项: {key}")
            tolerances[key] = value
        for key, value in overrides.get('optimizer', {}).items():
            if key not in optimizer:
                raise UsageError(f"未知优化器参数: {key}")
            optimizer[key] = value
        return replace(self, tolerances=tolerances, optimizer=optimizer)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        """从 argparse 结果构造配置"""
        config = cls(
            command=args.command,
            input_path=getattr(args, 'input', None),
            spec_path=getattr(args, 'spec', None),
            output_path=getattr(args, 'out', None),
            family=getattr(args, 'family', None),
            modes=getattr(args, 'modes', None),
            seed=getattr(args, 'seed', 0),
            progress=getattr(args, 'progress', False),
        )
        config_file = getattr(args, 'config', None)
        if config_file:
            if not os.path.exists(config_file):
                raise UsageError(f"配置文件不存在: {config_file}")
            with open(config_file, 'r', encoding='utf-8') as handle:
                config = config.with_overrides(json.load(handle))
        overrides: Dict[str, Any] = {'tolerances': {}, 'optimizer': {}}
        if getattr(args, 'budget', None) is not None:
            overrides['optimizer']['budget'] = args.budget
        if getattr(args, 'tol_variance', None) is not None:
            overrides['tolerances']['zero_variance'] = args.tol_variance
        return config.with_overrides(overrides)

    def provenance(self) -> Dict[str, Any]:
        """写入输出文件头的可复现信息"""
        return {
            'tool': f"mf_solver {VERSION}",
            'seed': self.seed,
            'budget': self.budget,
            'zero_variance': self.tolerances['zero_variance'],
            'reconstruction': self.tolerances['reconstruction'],
        }


DEFAULT_CONFIG = RunConfig()
