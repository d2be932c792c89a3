#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 异常定义
功能：按错误类别区分的异常层级，每个类别对应一个命令行退出码
"""


class MeanFieldError(ValueError):
    """所有工具异常的基类（保留ValueError语义，旧的 except ValueError 仍然有效）"""

    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class UsageError(MeanFieldError):
    """用法错误：算符族不一致、模式数不一致、参数不合法"""

    exit_code = 1


class ParseError(MeanFieldError):
    """文本格式解析错误，带行号"""

    exit_code = 2

    def __init__(self, message, line_number=None, **details):
        if line_number is not None:
            message = f"第 {line_number} 行: {message}"
        super().__init__(message, line_number=line_number, **details)
        self.line_number = line_number


class ConstraintError(MeanFieldError):
    """约束违反：非反厄米生成元、对易条件、Bogoliubov约束、校验失败等"""

    exit_code = 3


class DimensionCapError(MeanFieldError):
    """维度上限：精确对角化的模式数上限、李闭包的维数上限"""

    exit_code = 4


class InconclusiveError(MeanFieldError):
    """结论不确定：优化器在重启预算内未达到容差"""

    exit_code = 5
