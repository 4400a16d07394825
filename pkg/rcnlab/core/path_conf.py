#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from pathlib import Path

# 项目根目录
BASE_PATH = Path(__file__).resolve().parent.parent

# 日志文件路径
LOG_DIR = BASE_PATH / 'log'

# 可选 JSON 配置文件（相对于当前工作目录）
CONFIG_FILENAME = 'rcnlab.json'
