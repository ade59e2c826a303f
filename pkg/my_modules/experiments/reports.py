#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
结果输出：验证报告、CSV 表格与 SVG 折线图

CSV 浮点数一律写 17 位有效数字；SVG 固定 hash salt 且不写日期，
同样的输入重复运行得到逐字节相同的文件。
"""

import csv
import logging
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

logger = logging.getLogger(__name__)

SVG_HASH_SALT = 'extremes-pca'


@dataclass(frozen=True)
class Check:
    """单项检查：statistic 落在 [lower, upper] 内即通过"""
    name: str
    statistic: float
    lower: float
    upper: float

    @property
    def passed(self):
        return (not math.isnan(self.statistic)) and self.lower <= self.statistic <= self.upper


@dataclass(frozen=True)
class VerificationReport:
    """
    验证套件的报告

    Args:
        name: 套件名
        checks: Check 元组，全部通过才算通过
        diagnostics: 附加诊断信息（只用于展示）
    """
    name: str
    checks: tuple
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(self.checks) and all(check.passed for check in self.checks)

    def failed_checks(self):
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self):
        if self.passed:
            msg = f'{self.name}: {len(self.checks)} checks passed'
        else:
            msg = f'{self.name}: failed {", ".join(self.failed_checks())}'
        return {
            'ok': self.passed,
            'msg': msg,
            'name': self.name,
            'checks': [
                {'name': c.name, 'statistic': c.statistic, 'lower': c.lower, 'upper': c.upper, 'ok': c.passed}
                for c in self.checks
            ],
        }

    def to_rows(self):
        return [
            {'suite': self.name, 'check': c.name, 'statistic': c.statistic,
             'lower': c.lower, 'upper': c.upper, 'passed': int(c.passed)}
            for c in self.checks
        ]


def format_value(value):
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f'{value:.17g}'
    return str(value)


def write_csv(path, rows, columns):
    """按 columns 顺序写出字典行"""
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])
    logger.debug('[Reports] wrote %d rows to %s', len(rows), path)


def write_report_csv(path, reports):
    rows = [row for report in reports for row in report.to_rows()]
    write_csv(path, rows, ['suite', 'check', 'statistic', 'lower', 'upper', 'passed'])


def write_rmse_csv(path, table):
    write_csv(path, table.to_rows(), ['estimator', 'functional', 'k', 'rmse', 'truth'])


def write_dimension_csv(path, table):
    write_csv(path, table.dimension_rows(), ['estimator', 'k', 'mean_p_hat', 'hit_rate'])


def write_rmse_svg(path, table, functional):
    """一个泛函一张图：横轴 k，纵轴 RMSE，每个估计量一条折线"""
    with plt.rc_context({'svg.hashsalt': SVG_HASH_SALT, 'svg.fonttype': 'none'}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for estimator in table.estimators:
            ax.plot(table.k_grid, table.curve(estimator, functional), marker='o', label=estimator)
        ax.set_xlabel('k')
        ax.set_ylabel('RMSE')
        ax.set_title(f'functional ({functional}), {table.spec.family} d={table.spec.d} p={table.spec.p}')
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format='svg', metadata={'Date': None})
        plt.close(fig)
    logger.debug('[Reports] wrote chart %s', path)
