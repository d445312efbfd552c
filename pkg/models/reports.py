from typing import Dict, List, Optional, Any
from dataclasses import dataclass, field, asdict


@dataclass
class FitReport:
    sigma: float
    T: float
    N: int
    variant: str
    sup_error: float
    truncated_terms: int
    warning: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        report = asdict(self)
        if report["warning"] is None:
            del report["warning"]
        return report


@dataclass
class BenchReport:
    width: int
    height: int
    T_values: List[int]
    runs: int
    M: int
    N: int
    shiftable_ms: List[float]
    direct_ms: Optional[List[float]] = None
    max_relative_deviation: Optional[float] = None
    shiftable_spread: float = 0.0
    direct_growth: Optional[float] = None
    constant_time: bool = False
    machine: str = ""
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if any(t <= 0 for t in self.shiftable_ms):
            raise ValueError("Shiftable timings must be positive")
        if self.direct_ms is not None:
            if any(t <= 0 for t in self.direct_ms):
                raise ValueError("Direct timings must be positive")
            if self.max_relative_deviation is None:
                raise ValueError("Deviation is required when both paths ran")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
