#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
多元极值 PCA 工具主入口

应用概述：
    对多元正则变化随机向量做主成分分析：从极端观测的角度估计角测度的支撑子空间，
    数据驱动地选择投影维数，估计尾部泛函，并用 Monte Carlo 验证渐近结论。

主要功能：
    - analyze: 分析实际数据（可选边缘秩标准化）
    - simulate: 从 Gumbel / Dirichlet / 旋转 Dirichlet 模型抽样
    - rmse: 估计量 RMSE 研究
    - verify: 运行验证套件（clt, rate, local-identities, local-expansion 或 all）

技术栈：
    - click：命令行
    - numpy / scipy：数值计算
    - pydantic：配置校验
    - matplotlib：SVG 折线图

用法示例：
    python app.py simulate --family dirichlet --d 10 --model-p 2 --n 1000 --seed 1 -o out
    python app.py analyze out/data.csv --k 100 -o out
    python app.py verify all --seed 7 -o reports
"""

from my_modules.cli.commands import cli


if __name__ == '__main__':
    cli()
