# 异常定义
# 库函数只抛出这些异常，不打印也不退出；命令行层负责把它们映射到退出码


class ExtremesPcaError(ValueError):
    """所有库异常的基类"""


class ShapeError(ExtremesPcaError):
    """矩阵或向量形状不匹配"""


class DomainError(ExtremesPcaError):
    """参数超出定义域（例如 k 越界、零向量、非对称矩阵）"""


class DegenerateSplitError(ExtremesPcaError):
    """特征值在第 p 个位置没有间隔，局部几何无定义"""


class DataFormatError(ExtremesPcaError):
    """
    数据文件格式错误

    Args:
        message: 错误描述
        row: 出错的行号（从1开始，可为None）
        column: 出错的列号（从1开始，可为None）
    """

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f'row {row}')
        if column is not None:
            location.append(f'column {column}')
        if location:
            message = f'{message} ({", ".join(location)})'
        super().__init__(message)


class ConfigError(ExtremesPcaError):
    """配置无效，命令行层将其视为用法错误（退出码2）"""
