#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行入口

命令：
    - analyze      分析一个观测 CSV：PCA、维数选择、角测度原子与四个泛函
    - simulate     从模型抽样写出 n x d 数据
    - rmse         估计量 RMSE 研究（CSV + SVG）
    - verify       运行验证套件，任一失败则退出码为 1
    - list-suites  列出已注册的验证套件

退出码：0 成功，1 运行错误或验证失败，2 用法错误（含配置校验失败）。
每个命令在写任何结果之前完成全部校验，并在结果旁写出 config.resolved.txt。
"""

import functools
import logging
import math
import os

import click

from my_modules.cli.config import MAX_SEED, build_run_config, write_resolved_config
from my_modules.core.dimension import select_dimension
from my_modules.core.errors import ConfigError, ExtremesPcaError
from my_modules.core.extremes import empirical_moment_matrix, extract_exceedances, hill_estimator, read_data_csv, \
    write_data_csv
from my_modules.core.functionals import (
    FUNCTIONAL_NAMES,
    EstimatorConfig,
    TailFunctionalParams,
    default_functional_params,
    evaluate_functionals,
    pca_angular_measure,
    rank_frechet_standardize,
    write_measure_csv,
)
from my_modules.core.linalg import symmetric_eigh
from my_modules.experiments.oracle import compute_oracle
from my_modules.experiments.reports import write_csv, write_dimension_csv, write_report_csv, write_rmse_csv, \
    write_rmse_svg
from my_modules.experiments.rmse import ESTIMATORS, check_estimators, rmse_study
from my_modules.experiments.suite_registry import get_registry
from my_modules.simulation.models import MODEL_FAMILIES, sample_model
from my_modules.simulation.rng import RngStream, entropy_seed

logger = logging.getLogger(__name__)

RESOLVED_CONFIG = 'config.resolved.txt'
# 重复实验占用流 0..replicates-1
ORACLE_STREAM = 1 << 32
DEFAULT_K_TILDE = 10


def handle_errors(func):
    """库异常 → click 异常：配置错误为用法错误（2），其余为运行错误（1）"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            raise click.UsageError(str(e))
        except ExtremesPcaError as e:
            raise click.ClickException(str(e))
        except OSError as e:
            raise click.ClickException(f'{e.filename or ""}: {e.strerror or e}')
    return wrapper


def config_options(func):
    func = click.option('--set', 'assignments', multiple=True, metavar='KEY=VALUE',
                        help='覆盖任意点分键（可重复，最后应用）')(func)
    func = click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                        help='key=value 配置文件')(func)
    func = click.option('--output', '-o', type=click.Path(file_okay=False), default=None,
                        help='输出目录（默认当前目录）')(func)
    return func


def model_options(func):
    options = [
        click.option('--family', type=click.Choice(sorted(MODEL_FAMILIES)), help='模型族'),
        click.option('--d', 'd', type=click.IntRange(min=2), help='维数'),
        click.option('--model-p', type=click.IntRange(min=1), help='模型角测度的支撑维数 p'),
        click.option('--alpha', type=click.FloatRange(min=0, min_open=True), help='尾指数 α'),
        click.option('--theta', type=click.FloatRange(min=1), help='Gumbel 依赖参数 ϑ'),
        click.option('--dirichlet-params', help='Dirichlet 参数，逗号分隔'),
        click.option('--noise-sigma', type=click.FloatRange(min=0), help='噪声标准差'),
        click.option('--rotation-angle-bound', type=click.FloatRange(min=0), help='旋转角上界（弧度）'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _model_flags(kwargs):
    return {
        'model.family': kwargs.get('family'),
        'model.d': kwargs.get('d'),
        'model.p': kwargs.get('model_p'),
        'model.alpha': kwargs.get('alpha'),
        'model.theta': kwargs.get('theta'),
        'model.dirichlet_params': kwargs.get('dirichlet_params'),
        'model.noise_sigma': kwargs.get('noise_sigma'),
        'model.rotation_angle_bound': kwargs.get('rotation_angle_bound'),
    }


def _output_dir(config):
    os.makedirs(config.output, exist_ok=True)
    return config.output


def _require(value, option):
    if value is None:
        raise ConfigError(f'{option} is required')
    return value


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='输出调试日志')
def cli(verbose):
    """多元极值的主成分分析：数据分析、模拟与验证"""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format='%(levelname)s %(name)s: %(message)s')


@cli.command()
@click.argument('input_csv', type=click.Path(exists=True, dir_okay=False))
@click.option('--k', type=click.IntRange(min=1), help='超阈值个数 k')
@click.option('--k-tilde', type=click.IntRange(min=1), help='拟合子空间用的超阈值个数（默认 k）')
@click.option('--p', 'p', help='投影维数，整数或 auto')
@click.option('--tau', type=float, help='维数选择的捕获比例目标')
@click.option('--beta', type=float, help='维数选择的正态分位水平')
@click.option('--alpha', type=click.FloatRange(min=0, min_open=True), help='泛函的尾指数（默认 Hill 估计）')
@click.option('--p-model', type=click.IntRange(min=1), help='泛函 (i)(ii) 的 p（默认所选维数）')
@click.option('--t-i', type=click.FloatRange(min=0, min_open=True), help='泛函 (i) 的阈值')
@click.option('--standardize/--no-standardize', default=None, help='先做边缘秩标准化')
@config_options
@handle_errors
def analyze(input_csv, k, k_tilde, p, tau, beta, alpha, p_model, t_i, standardize, output, config_path,
            assignments):
    """分析观测数据 INPUT_CSV"""
    config = build_run_config(config_path, assignments, {
        'k': k, 'k_tilde': k_tilde, 'p': p, 'tau': tau, 'beta': beta,
        'functional.alpha': alpha, 'functional.p_model': p_model, 'functional.t_i': t_i,
        'standardize': standardize, 'output': output,
    })
    k = _require(config.k, '--k')
    data = read_data_csv(input_csv)
    if not 1 <= k <= data.n - 1:
        raise ConfigError(f'--k must lie in [1, n-1] = [1, {data.n - 1}] for {data.n} observations, got {k}')
    k_tilde = config.k_tilde or k
    fixed_p = None if config.auto_dimension else config.p
    estimator = EstimatorConfig(k=k, k_tilde=k_tilde, p=fixed_p, tau=config.tau, beta=config.beta)
    estimator.validate(data.n, data.d)
    if config.standardize:
        data = rank_frechet_standardize(data)

    fit_sample = extract_exceedances(data, k_tilde)
    fit_sigma = empirical_moment_matrix(fit_sample)
    eigen = symmetric_eigh(fit_sigma.matrix)
    selection = select_dimension(fit_sample, fit_sigma, config.tau, config.beta) if k_tilde >= 2 else None
    measure = pca_angular_measure(data, estimator)

    func = config.functional
    if func.alpha is not None:
        tail_index = func.alpha
    elif config.standardize:
        tail_index = 1.0
    else:
        tail_index = hill_estimator(data.radii(), k)
    p_for_functionals = func.p_model or measure.dimension
    threshold = func.t_i if func.t_i is not None else 0.9 / math.sqrt(p_for_functionals)
    prm = TailFunctionalParams(alpha=tail_index, p_model=p_for_functionals, t_i=threshold)
    values = evaluate_functionals(measure, prm)

    out = _output_dir(config)
    captured = 0.0
    eigen_rows = []
    for index, value in enumerate(eigen.eigenvalues, start=1):
        captured += float(value)
        eigen_rows.append({'index': index, 'eigenvalue': float(value), 'captured': captured})
    write_csv(os.path.join(out, 'eigenvalues.csv'), eigen_rows, ['index', 'eigenvalue', 'captured'])
    if selection is not None:
        write_csv(os.path.join(out, 'dimension.csv'), selection.to_rows(),
                  ['p', 'captured', 'sigma_hat', 'threshold', 'accepted'])
    write_measure_csv(os.path.join(out, 'measure.csv'), measure)
    write_csv(os.path.join(out, 'functionals.csv'),
              [{'functional': name, 'value': values[name]} for name in FUNCTIONAL_NAMES], ['functional', 'value'])
    if config.standardize:
        write_data_csv(os.path.join(out, 'standardized.csv'), data.values)
    write_resolved_config(os.path.join(out, RESOLVED_CONFIG), config, {
        'input': input_csv,
        'k_tilde': k_tilde,
        'p_used': measure.dimension,
        'mass_deficit': measure.mass_deficit(),
        'functional.alpha': tail_index,
        'functional.p_model': p_for_functionals,
        'functional.t_i': threshold,
    })

    if selection is not None:
        click.echo(f'p_hat={selection.p_hat}')
    click.echo(f'p_used={measure.dimension} atoms={measure.size} dropped={measure.dropped} '
               f'mass_deficit={measure.mass_deficit():.17g}')
    for name in FUNCTIONAL_NAMES:
        click.echo(f'functional_{name}={values[name]:.17g}')


@cli.command()
@model_options
@click.option('--n', type=click.IntRange(min=0), help='样本量')
@click.option('--seed', type=click.IntRange(0, MAX_SEED), help='随机种子（缺省时用系统熵并打印）')
@config_options
@handle_errors
def simulate(family, d, model_p, alpha, theta, dirichlet_params, noise_sigma, rotation_angle_bound, n, seed,
             output, config_path, assignments):
    """从模型抽样，写出 data.csv"""
    flags = _model_flags(locals())
    flags.update({'n': n, 'seed': seed, 'output': output})
    config = build_run_config(config_path, assignments, flags)
    spec = _require(config.model, 'model (model.family, model.d, model.p)')
    n = _require(config.n, '--n')
    seed = config.seed
    if seed is None:
        seed = entropy_seed()
        click.echo(f'seed={seed}')

    data = sample_model(RngStream(seed, 0), spec, n)
    out = _output_dir(config)
    write_data_csv(os.path.join(out, 'data.csv'), data.values)
    write_resolved_config(os.path.join(out, RESOLVED_CONFIG), config, {'seed': seed})
    logger.info('[Cli] wrote %d x %d observations to %s', n, spec.d, out)


def _functional_params(config, spec):
    base = default_functional_params(spec)
    func = config.functional
    return TailFunctionalParams(
        alpha=func.alpha if func.alpha is not None else base.alpha,
        p_model=func.p_model or base.p_model,
        t_i=func.t_i if func.t_i is not None else base.t_i,
    )


@cli.command()
@model_options
@click.option('--n', type=click.IntRange(min=2), help='每次重复的样本量')
@click.option('--k-grid', help='k 网格，逗号分隔')
@click.option('--k-tilde', type=click.IntRange(min=1), help='替代估计量拟合子空间用的 k̃（默认 10）')
@click.option('--p', 'p', help='固定维数估计量使用的 p（整数；auto 表示模型的 p）')
@click.option('--replicates', type=click.IntRange(min=1), help='重复次数')
@click.option('--estimators', help=f'估计量，逗号分隔；可选 {", ".join(ESTIMATORS)}')
@click.option('--tau', type=float, help='维数选择的捕获比例目标')
@click.option('--beta', type=float, help='维数选择的正态分位水平')
@click.option('--seed', type=click.IntRange(0, MAX_SEED), help='随机种子（必需）')
@click.option('--oracle-mc-size', type=click.IntRange(min=1), help='真值计算的 Monte Carlo 样本量')
@config_options
@handle_errors
def rmse(family, d, model_p, alpha, theta, dirichlet_params, noise_sigma, rotation_angle_bound, n, k_grid,
         k_tilde, p, replicates, estimators, tau, beta, seed, oracle_mc_size, output, config_path, assignments):
    """估计量 RMSE 研究：rmse.csv、dimension.csv、truths.csv 与每个泛函一张 SVG"""
    flags = _model_flags(locals())
    flags.update({
        'n': n, 'k_grid': k_grid, 'k_tilde': k_tilde, 'p': p, 'replicates': replicates,
        'estimators': estimators, 'tau': tau, 'beta': beta, 'seed': seed,
        'oracle.mc_size': oracle_mc_size, 'output': output,
    })
    config = build_run_config(config_path, assignments, flags)
    seed = _require(config.seed, '--seed')
    spec = _require(config.model, 'model (model.family, model.d, model.p)')
    n = _require(config.n, '--n')
    check_estimators(config.estimators)
    k_tilde = config.k_tilde or min(DEFAULT_K_TILDE, min(config.k_grid))
    prm = _functional_params(config, spec)

    given = dict(config.truth)
    oracle = None
    if set(given) != set(FUNCTIONAL_NAMES):
        oracle = compute_oracle(spec, max(config.k_grid) / n, config.oracle.mc_size, RngStream(seed, ORACLE_STREAM),
                                limit_size=config.oracle.limit_size, prm=prm)
    truths = {name: given.get(name, oracle.functional_truths[name] if oracle else math.nan)
              for name in FUNCTIONAL_NAMES}

    table = rmse_study(spec, n, config.k_grid, k_tilde, config.replicates, config.estimators, truths, seed,
                       tau=config.tau, beta=config.beta, prm=prm,
                       p_fixed=None if config.auto_dimension else config.p)

    out = _output_dir(config)
    write_rmse_csv(os.path.join(out, 'rmse.csv'), table)
    write_dimension_csv(os.path.join(out, 'dimension.csv'), table)
    truth_rows = [{'functional': name, 'truth': truths[name],
                   'source': 'config' if name in given else 'oracle'} for name in FUNCTIONAL_NAMES]
    write_csv(os.path.join(out, 'truths.csv'), truth_rows, ['functional', 'truth', 'source'])
    for name in FUNCTIONAL_NAMES:
        write_rmse_svg(os.path.join(out, f'rmse_{name}.svg'), table, name)
    write_resolved_config(os.path.join(out, RESOLVED_CONFIG), config, {
        'k_tilde': k_tilde,
        'functional.alpha': prm.alpha,
        'functional.p_model': prm.p_model,
        'functional.t_i': prm.t_i,
        'truth': truths,
    })
    for name in FUNCTIONAL_NAMES:
        best = min(table.estimators, key=lambda e: table.curve(e, name)[-1])
        click.echo(f'functional_{name}: truth={truths[name]:.6g} best at k={table.k_grid[-1]}: {best}')


def _resolve_suite_ids(names, registry):
    available = [info['id'] for info in registry.get_available_suites()]
    if 'all' in names:
        return available
    unknown = [name for name in names if name not in available]
    if unknown:
        raise click.BadParameter(f'unknown suites {unknown}; choose from {", ".join(available + ["all"])}',
                                 param_hint='SUITES')
    return list(dict.fromkeys(names))


@cli.command()
@click.argument('suites', nargs=-1, required=True)
@click.option('--seed', type=click.IntRange(0, MAX_SEED), help='随机种子（必需）')
@config_options
@click.pass_context
@handle_errors
def verify(ctx, suites, seed, output, config_path, assignments):
    """运行验证套件 SUITES（套件 id 或 all），每个套件写 verify_<id>.csv"""
    registry = get_registry()
    suite_ids = _resolve_suite_ids(suites, registry)
    config = build_run_config(config_path, assignments, {'seed': seed, 'output': output})
    seed = _require(config.seed, '--seed')
    stray = sorted(set(config.suite) - {info['id'] for info in registry.get_available_suites()})
    if stray:
        raise ConfigError(f'settings given for unknown suites {stray}')
    instances = [registry.create_suite(suite_id, config.suite.get(suite_id)) for suite_id in suite_ids]

    out = _output_dir(config)
    failed = []
    for suite in instances:
        logger.info('[Cli] running suite %s', suite.suite_id)
        report = suite.run(seed)
        write_report_csv(os.path.join(out, f'verify_{suite.suite_id}.csv'), [report])
        result = report.to_dict()
        click.echo(f'{"PASS" if result["ok"] else "FAIL"} {result["msg"]}')
        if not result['ok']:
            failed.append(suite.suite_id)
    write_resolved_config(os.path.join(out, RESOLVED_CONFIG), config, {
        'suite': {suite.suite_id: suite.describe()['settings'] for suite in instances},
    })
    if failed:
        logger.info('[Cli] failed suites: %s', ', '.join(failed))
        ctx.exit(1)


@cli.command('list-suites')
def list_suites():
    """列出已注册的验证套件"""
    for info in get_registry().get_available_suites():
        click.echo(f'{info["id"]}\t{info["name"]}\t{info["description"]}')
