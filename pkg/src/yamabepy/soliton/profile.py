"""
Value types for the soliton profile problem.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from yamabepy.errors import ConfigError, ProfileInputError

SAMPLE_COLUMNS = ["r", "phi", "dphi", "ddphi", "f", "R"]


@dataclass(frozen=True)
class SolitonParams:
    """Dimension n, soliton constant rho (>0 shrinking, 0 steady, <0 expanding) and fiber scalar
    curvature rbar."""

    n: int
    rho: float
    rbar: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ConfigError(f"n must be an integer >= 3, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "rbar", float(self.rbar))
        if not (np.isfinite(self.rho) and np.isfinite(self.rbar)):
            raise ConfigError("rho and rbar must be finite")

    @property
    def kind(self) -> str:
        if self.rho > 0:
            return "shrinking"
        if self.rho < 0:
            return "expanding"
        return "steady"

    def to_dict(self) -> dict:
        return {"n": self.n, "rho": self.rho, "Rbar": self.rbar}

    @classmethod
    def from_dict(cls, data: dict) -> "SolitonParams":
        return cls(n=data["n"], rho=data["rho"], rbar=data["Rbar"])


@dataclass(frozen=True)
class ProfileState:
    "r, phi = f' and p = phi' = f'' = R - rho"

    r: float
    phi: float
    p: float


class EndpointKind(str, Enum):
    CRITICAL_POINT = "critical-point"
    BLOW_UP = "blow-up"
    INTEGRATION_LIMIT = "integration-limit"


class Classification(str, Enum):
    ROTATIONALLY_SYMMETRIC = "RotationallySymmetric"
    CYLINDER_TYPE = "CylinderType"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ProfileDomain:
    start: float
    end: float
    start_kind: EndpointKind = EndpointKind.INTEGRATION_LIMIT
    end_kind: EndpointKind = EndpointKind.INTEGRATION_LIMIT

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "start_kind": self.start_kind.value,
            "end_kind": self.end_kind.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProfileDomain":
        return cls(
            start=float(data["start"]),
            end=float(data["end"]),
            start_kind=EndpointKind(data.get("start_kind", EndpointKind.INTEGRATION_LIMIT)),
            end_kind=EndpointKind(data.get("end_kind", EndpointKind.INTEGRATION_LIMIT)),
        )


@dataclass(frozen=True, eq=False)
class SolitonProfile:
    """Tabulated solution r -> (phi, phi', phi'', f, R) of the profile ODE.

    ``params`` is None for tables read without metadata. ``reflected`` marks profiles integrated
    in the reflected coordinate r -> -r (initial phi < 0). Treat ``samples`` as read-only.
    """

    params: Optional[SolitonParams]
    samples: pd.DataFrame
    domain: ProfileDomain
    classification: Classification = Classification.UNDETERMINED
    reflected: bool = False
    notes: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        missing = [col for col in SAMPLE_COLUMNS if col not in self.samples.columns]
        if missing:
            raise ProfileInputError(f"profile samples missing columns {missing}")
        if len(self.samples) == 0:
            raise ProfileInputError("profile has no samples")

    def __len__(self):
        return len(self.samples)

    @property
    def r(self) -> np.ndarray:
        return self.samples["r"].to_numpy()

    @property
    def phi(self) -> np.ndarray:
        return self.samples["phi"].to_numpy()

    @property
    def dphi(self) -> np.ndarray:
        return self.samples["dphi"].to_numpy()

    def with_classification(self, classification: Classification) -> "SolitonProfile":
        return replace(self, classification=classification)

    def mean_curvature(self, n: Optional[int] = None) -> np.ndarray:
        "H = (n-1) phi'/phi at each sample (inf at a critical point)"
        n = self._dimension(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (n - 1) * self.dphi / self.phi

    def _dimension(self, n):
        if n is not None:
            return n
        if self.params is None:
            raise ProfileInputError("profile has no parameters, pass the dimension n")
        return self.params.n

    def to_frame(self, n: Optional[int] = None) -> pd.DataFrame:
        "Output table r, phi, dphi, ddphi, f, R, H with f shifted to vanish at the first sample"
        frame = self.samples[SAMPLE_COLUMNS].reset_index(drop=True).copy()
        frame["f"] = frame["f"] - frame["f"].iloc[0]
        frame["H"] = self.mean_curvature(n)
        return frame
