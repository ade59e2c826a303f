#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
运行配置

配置文件格式：每行 key=value，# 开头为注释，键可以带点（model.family=dirichlet），
列表用逗号分隔（k_grid=50,100,200）。解析结果是嵌套字典，再交给 pydantic 校验。
合并顺序：默认值 < 配置文件 < 命令行选项 < --set。
"""

import logging
from typing import Dict, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from my_modules.core.errors import ConfigError
from my_modules.simulation.models import ModelSpec

logger = logging.getLogger(__name__)

DEFAULT_ESTIMATORS = ('direct', 'pca', 'pca_auto', 'pca_alt', 'pca_alt_auto')
MAX_SEED = 2 ** 64 - 1


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(',') if item.strip()]
    return value


class FunctionalConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    alpha: Optional[float] = Field(default=None, gt=0)
    p_model: Optional[int] = Field(default=None, ge=1)
    t_i: Optional[float] = Field(default=None, gt=0)


class OracleConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    mc_size: int = Field(default=1_000_000, ge=100_000)
    limit_size: Optional[int] = Field(default=None, ge=1000)


class RunConfig(BaseModel):
    """
    一次命令运行的完整参数

    不同命令只使用其中一部分字段；未用到的字段保持默认值并照常写进 config.resolved.txt。
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    model: Optional[ModelSpec] = None
    n: Optional[int] = Field(default=None, ge=0)
    k: Optional[int] = Field(default=None, ge=1)
    k_tilde: Optional[int] = Field(default=None, ge=1)
    p: Union[int, Literal['auto']] = 'auto'
    tau: float = Field(default=0.95, gt=0, lt=1)
    beta: float = Field(default=0.95, gt=0, lt=1)
    seed: Optional[int] = Field(default=None, ge=0, le=MAX_SEED)
    replicates: int = Field(default=200, ge=1)
    k_grid: Tuple[int, ...] = (50, 100, 200, 300)
    estimators: Tuple[str, ...] = DEFAULT_ESTIMATORS
    standardize: bool = False
    output: str = '.'
    functional: FunctionalConfig = FunctionalConfig()
    oracle: OracleConfig = OracleConfig()
    truth: Dict[Literal['i', 'ii', 'iii', 'iv'], float] = {}
    suite: Dict[str, Dict[str, str]] = {}

    @field_validator('k_grid', 'estimators', mode='before')
    @classmethod
    def _split(cls, value):
        return _split_list(value)

    @field_validator('p')
    @classmethod
    def _positive_p(cls, value):
        if value != 'auto' and value < 1:
            raise ValueError('p must be a positive integer or "auto"')
        return value

    @property
    def auto_dimension(self):
        return self.p == 'auto'


def parse_config_text(text, source='<config>'):
    """
    解析 key=value 文本为嵌套字典

    Raises:
        ConfigError: 行格式错误（带行号）
    """
    nested = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError(f'{source}:{line_no}: expected key=value, got {raw!r}')
        key, value = line.split('=', 1)
        set_dotted(nested, key.strip(), value.strip(), f'{source}:{line_no}')
    return nested


def parse_config_file(path):
    with open(path, 'r', encoding='utf-8') as f:
        return parse_config_text(f.read(), source=str(path))


def set_dotted(nested, key, value, where='--set'):
    if not key or any(not part for part in key.split('.')):
        raise ConfigError(f'{where}: invalid key {key!r}')
    parts = key.split('.')
    node = nested
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f'{where}: key {key!r} conflicts with a scalar value')
        node = child
    if isinstance(node.get(parts[-1]), dict):
        raise ConfigError(f'{where}: key {key!r} conflicts with a section')
    node[parts[-1]] = value


def apply_overrides(nested, assignments):
    """应用 --set key=value 覆盖"""
    for assignment in assignments:
        if '=' not in assignment:
            raise ConfigError(f'--set expects key=value, got {assignment!r}')
        key, value = assignment.split('=', 1)
        set_dotted(nested, key.strip(), value.strip())
    return nested


def _format_errors(error):
    messages = []
    for item in error.errors():
        location = '.'.join(str(part) for part in item['loc']) or '<config>'
        messages.append(f'{location}: {item["msg"]}')
    return '; '.join(messages)


def build_run_config(config_path=None, assignments=(), flags=None):
    """
    合并配置来源并校验

    Args:
        config_path: 配置文件路径（可为 None）
        assignments: --set 的 key=value 列表
        flags: 命令行选项 {点分键: 值}，值为 None 的忽略

    Returns:
        RunConfig

    Raises:
        ConfigError: 任何校验失败（信息中带出错的键）
    """
    nested = parse_config_file(config_path) if config_path else {}
    for key, value in (flags or {}).items():
        if value is not None:
            set_dotted(nested, key, value, where='option')
    apply_overrides(nested, assignments)
    try:
        config = RunConfig.model_validate(nested)
    except ValidationError as e:
        raise ConfigError(f'invalid configuration: {_format_errors(e)}')
    logger.debug('[Config] resolved %s', config)
    return config


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f'{prefix}.{key}' if prefix else key, value[key], out)
    elif isinstance(value, (list, tuple)):
        out[prefix] = ','.join(_scalar(v) for v in value)
    elif value is not None:
        out[prefix] = _scalar(value)


def _scalar(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def resolved_lines(config, extra=None):
    """完全展开的 key=value 行（按键排序）"""
    data = config.model_dump(exclude={'model'})
    out = {}
    _flatten('', data, out)
    if config.model is not None:
        for key, value in config.model.as_config().items():
            out[f'model.{key}'] = value
    for key, value in (extra or {}).items():
        _flatten(key, value, out)
    return [f'{key}={out[key]}' for key in sorted(out)]


def write_resolved_config(path, config, extra=None):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write('\n'.join(resolved_lines(config, extra)) + '\n')
