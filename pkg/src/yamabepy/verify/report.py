"""
Verification results and their JSON document.
"""
import json
import math
from dataclasses import dataclass, field
from typing import List


@dataclass(frozen=True)
class CheckResult:
    """One named residual against its tolerance.

    ``above`` checks pass when the residual exceeds the tolerance (used where a quantity must be
    bounded away from zero); all others pass when residual <= tolerance.
    """

    name: str
    residual: float
    tolerance: float
    sample_count: int = 1
    above: bool = False

    def __post_init__(self):
        residual = float(self.residual)
        if math.isnan(residual) or residual < 0:
            raise ValueError(f"residual of {self.name} must be non-negative, got {residual}")
        object.__setattr__(self, "residual", residual)
        object.__setattr__(self, "tolerance", float(self.tolerance))

    @property
    def passed(self) -> bool:
        if self.above:
            return self.residual > self.tolerance
        return self.residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual if math.isfinite(self.residual) else None,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    checks: List[CheckResult] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, result: CheckResult) -> CheckResult:
        self.checks.append(result)
        self.provenance.setdefault("sample_counts", {})[result.name] = result.sample_count
        return result

    def extend(self, results):
        for result in results:
            self.add(result)

    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> dict:
        return {
            "checks": [check.to_dict() for check in self.checks],
            "overall_pass": self.overall_pass,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False) + "\n"
