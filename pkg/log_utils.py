#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平均场可解性工具 - 日志工具
功能：彩色终端日志格式（emoji前缀 + ANSI颜色），统一的 logger 获取方式
"""

import logging
import sys


# 颜色定义
class Colors:
    RED = '\033[0;31m'
    GREEN = '\033[0;32m'
    YELLOW = '\033[1;33m'
    BLUE = '\033[0;34m'
    PURPLE = '\033[0;35m'
    CYAN = '\033[0;36m'
    NC = '\033[0m'  # No Color


LEVEL_STYLES = {
    logging.DEBUG: (Colors.CYAN, "🔍", "[DEBUG]"),
    logging.INFO: (Colors.BLUE, "✅", "[INFO]"),
    logging.WARNING: (Colors.YELLOW, "⚠️", "[WARNING]"),
    logging.ERROR: (Colors.RED, "❌", "[ERROR]"),
    logging.CRITICAL: (Colors.PURPLE, "❌", "[CRITICAL]"),
}

_ROOT_NAME = "mf_solver"
_configured = False


class ColoredFormatter(logging.Formatter):
    """带颜色与emoji前缀的日志格式"""

    def __init__(self, use_color=True):
        super().__init__()
        self.use_color = use_color

    def format(self, record):
        color, emoji, tag = LEVEL_STYLES.get(record.levelno, (Colors.NC, "", f"[{record.levelname}]"))
        message = record.getMessage()
        if record.exc_info:
            message = f"{message}\n{self.formatException(record.exc_info)}"
        if self.use_color:
            return f"{color}{tag}{Colors.NC} {emoji} {message}"
        return f"{tag} {emoji} {message}"


def get_logger(name: str) -> logging.Logger:
    """获取模块 logger（首次调用时挂载彩色 handler）"""
    global _configured
    root = logging.getLogger(_ROOT_NAME)
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(ColoredFormatter(use_color=sys.stderr.isatty()))
        root.addHandler(handler)
        root.setLevel(logging.WARNING)
        root.propagate = False
        _configured = True
    return root.getChild(name)


def set_verbosity(verbose: bool = False, quiet: bool = False):
    """根据命令行开关设置日志级别"""
    get_logger("cli")
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.INFO
    logging.getLogger(_ROOT_NAME).setLevel(level)
