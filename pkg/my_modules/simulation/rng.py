"""
带种子的随机数流

每个 (seed, stream) 对应一个独立的计数器型 Philox 生成器，重复实验的抽样只取决于
它的流编号，与调度顺序无关。子流在键路径后追加编号，不会与顶层流重合。
"""

from dataclasses import dataclass, field
import secrets

import numpy as np

from my_modules.core.errors import DomainError

_MAX_U64 = 2 ** 64 - 1


def entropy_seed():
    """从操作系统取一个新的 64 位种子；调用方负责打印，以便复现"""
    return secrets.randbits(64)


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0
    branch: tuple = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name, value in (('seed', self.seed), ('stream', self.stream)) + tuple(
                ('branch', b) for b in self.branch):
            if not 0 <= value <= _MAX_U64:
                raise DomainError(f'{name} must be an unsigned 64-bit integer, got {value}')
        keyed = np.random.SeedSequence(self.seed, spawn_key=(self.stream,) + tuple(self.branch))
        object.__setattr__(self, 'generator', np.random.Generator(np.random.Philox(keyed)))

    def child(self, index):
        """当前流之下的独立子流"""
        return RngStream(self.seed, self.stream, tuple(self.branch) + (index,))

    def uniform(self, size=None, low=0.0, high=1.0):
        return self.generator.uniform(low, high, size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def standard_exponential(self, size=None):
        return self.generator.standard_exponential(size)

    def standard_gamma(self, shape, size=None):
        return self.generator.standard_gamma(shape, size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)
