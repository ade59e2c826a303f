# 验证套件基类定义

from my_modules.core.errors import ConfigError


def _coerce(key, default, value):
    """把配置文件中的字符串转换成默认值的类型"""
    try:
        if isinstance(default, tuple):
            items = value.split(',') if isinstance(value, str) else list(value)
            kind = type(default[0]) if default else float
            return tuple(kind(float(item)) if kind is int else kind(item) for item in items)
        if isinstance(default, bool):
            return str(value).lower() in ('1', 'true', 'yes')
        if isinstance(default, int):
            number = float(value)
            if number != int(number):
                raise ValueError(f'{value} is not an integer')
            return int(number)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f'invalid value {value!r} for setting {key}: {e}')
    return value


class BaseSuite:
    """
    所有验证套件的基类，定义了套件必须实现的接口
    """
    suite_id = None
    default_settings = {}

    def __init__(self, settings=None):
        """
        初始化套件

        Args:
            settings: 覆盖 default_settings 的参数字典（键必须已存在于 default_settings）
        """
        settings = dict(settings or {})
        unknown = sorted(set(settings) - set(self.default_settings))
        if unknown:
            raise ConfigError(f'unknown settings for suite {self.suite_id}: {unknown}')
        self.settings = dict(self.default_settings)
        for key, value in settings.items():
            self.settings[key] = _coerce(key, self.default_settings[key], value)

    def run(self, seed):
        """
        运行套件

        Args:
            seed: 随机种子（不使用随机数的套件可以忽略）

        Returns:
            VerificationReport: 验证报告
        """
        raise NotImplementedError

    def describe(self):
        """
        获取套件的当前参数

        Returns:
            dict: 套件ID与参数
        """
        return {'id': self.suite_id, 'settings': dict(self.settings)}
