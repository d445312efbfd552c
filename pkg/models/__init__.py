from .config import ShiftConfig, KernelFamily, FilterMode
from .image import ImageBuffer, BoundaryPolicy
from .reports import BenchReport, FitReport

__all__ = ['ShiftConfig', 'KernelFamily', 'FilterMode', 'ImageBuffer', 'BoundaryPolicy',
           'BenchReport', 'FitReport']
