# 验证套件注册表，用于管理和加载验证套件

import importlib
import logging
import os

from my_modules.core.errors import ConfigError

logger = logging.getLogger(__name__)


class SuiteRegistry:
    """
    套件注册表，负责发现、注册和创建验证套件实例
    """
    def __init__(self):
        self.suites = {}

    def initialize(self):
        """
        自动发现并注册 suites/ 目录下的所有套件
        """
        suites_dir = os.path.join(os.path.dirname(__file__), 'suites')
        # 目录顺序与文件系统有关，排序后注册顺序固定
        for suite_folder in sorted(os.listdir(suites_dir)):
            suite_path = os.path.join(suites_dir, suite_folder)
            if not os.path.isdir(suite_path) or suite_folder == '__pycache__':
                continue
            module_name = f'my_modules.experiments.suites.{suite_folder}.suite'
            try:
                suite_module = importlib.import_module(module_name)
            except ImportError as e:
                logger.warning('[SuiteRegistry] 导入套件模块 %s 失败: %s', suite_folder, e)
                continue
            if hasattr(suite_module, 'register_suite'):
                self.register_suite(suite_module.register_suite())
        return self

    def register_suite(self, suite_info):
        """
        手动注册套件

        Args:
            suite_info: 套件信息字典（id, name, description, class）
        """
        self.suites[suite_info['id']] = suite_info
        logger.debug('[SuiteRegistry] 成功注册套件: %s', suite_info['name'])

    def get_available_suites(self):
        """
        获取所有可用套件

        Returns:
            list: 套件信息列表（按 id 排序）
        """
        return [self.suites[suite_id] for suite_id in sorted(self.suites)]

    def create_suite(self, suite_id, settings=None):
        """
        创建套件实例

        Args:
            suite_id: 套件ID
            settings: 参数覆盖

        Returns:
            BaseSuite: 套件实例

        Raises:
            ConfigError: 套件不存在
        """
        if suite_id not in self.suites:
            raise ConfigError(f'unknown suite {suite_id!r}; available: {", ".join(sorted(self.suites))}')
        return self.suites[suite_id]['class'](settings)


# 全局套件注册表实例（首次使用时由 get_registry 初始化）
suite_registry = SuiteRegistry()


def get_registry():
    if not suite_registry.suites:
        suite_registry.initialize()
    return suite_registry
