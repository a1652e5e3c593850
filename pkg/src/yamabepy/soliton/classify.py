"""
Classify integrated profiles into the two cases of the warped-product dichotomy:

* RotationallySymmetric: f has exactly one critical point, located at one end of the domain
  (phi -> 0 there), and phi stays positive up to the other end.
* CylinderType: f has no critical point on the integrated domain, phi is bounded away from 0 and
  the integration-limit ends are not heading towards a critical point.

Everything else is Undetermined. Two critical points would describe a compact soliton, which
cannot be non-trivial, so that case is flagged rather than accepted.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from yamabepy.errors import InsufficientFiberDataError, ProfileInputError
from yamabepy.soliton.profile import Classification, EndpointKind, ProfileDomain, SolitonProfile
from yamabepy.warped.fibers import FiberGeometry
from yamabepy.warped.geometry import WarpingSample, ricci_closed_form

logger = logging.getLogger(__name__)

DEFAULT_PHI_MIN = 1.0e-8
DEFAULT_SLOPE_TOL = 1.0e-6


@dataclass(frozen=True)
class ClassificationReport:
    classification: Classification
    critical_points: List[float]
    domain: ProfileDomain
    compact_inconsistency: bool = False
    notes: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "critical_points": list(self.critical_points),
            "domain": self.domain.to_dict(),
            "compact_inconsistency": self.compact_inconsistency,
            "notes": list(self.notes),
        }


def _interior_sign_changes(r, phi) -> List[float]:
    "Linearly interpolated zeros of phi between consecutive samples of opposite sign"
    crossings = np.nonzero(phi[:-1] * phi[1:] < 0)[0]
    return [float(r[i] - phi[i] * (r[i + 1] - r[i]) / (phi[i + 1] - phi[i])) for i in crossings]


def _settled(slope, phi, tol, left: bool) -> bool:
    scale = tol * max(1.0, abs(phi))
    return slope <= scale if left else slope >= -scale


def classify(
    profile: SolitonProfile,
    phi_min: float = DEFAULT_PHI_MIN,
    slope_tol: float = DEFAULT_SLOPE_TOL,
) -> ClassificationReport:
    if profile is None or len(profile) == 0:
        raise ProfileInputError("cannot classify an empty profile")
    samples = profile.samples.sort_values("r")
    r = samples["r"].to_numpy()
    phi = samples["phi"].to_numpy()
    dphi = samples["dphi"].to_numpy()
    domain = profile.domain

    start_critical = domain.start_kind == EndpointKind.CRITICAL_POINT or abs(phi[0]) <= phi_min
    end_critical = domain.end_kind == EndpointKind.CRITICAL_POINT or abs(phi[-1]) <= phi_min
    critical = []
    if start_critical:
        critical.append(float(r[0]))
    critical.extend(_interior_sign_changes(r, phi))
    if end_critical and (len(r) > 1 or not start_critical):
        critical.append(float(r[-1]))

    notes = []
    inconsistent = len(critical) >= 2
    if inconsistent:
        message = (
            f"critical points of f at r={critical}: a compact soliton is excluded, the profile is "
            "numerically inconsistent"
        )
        logger.warning(message)
        notes.append(message)
        classification = Classification.UNDETERMINED
    elif len(critical) == 1 and (start_critical or end_critical):
        other = phi[-1] if start_critical else phi[0]
        if abs(other) > phi_min:
            classification = Classification.ROTATIONALLY_SYMMETRIC
        else:
            classification = Classification.UNDETERMINED
    elif len(critical) == 1:
        notes.append(f"interior critical point at r={critical[0]:.6g}")
        classification = Classification.UNDETERMINED
    else:
        ends_ok = True
        if domain.start_kind == EndpointKind.INTEGRATION_LIMIT:
            ends_ok &= _settled(dphi[0], phi[0], slope_tol, left=True)
        if domain.end_kind == EndpointKind.INTEGRATION_LIMIT:
            ends_ok &= _settled(dphi[-1], phi[-1], slope_tol, left=False)
        if np.min(np.abs(phi)) > phi_min and ends_ok:
            classification = Classification.CYLINDER_TYPE
        else:
            classification = Classification.UNDETERMINED
            notes.append("no critical point on the domain, but phi may still reach 0 outside it")

    logger.debug("classified profile on [%g, %g] as %s", r[0], r[-1], classification.value)
    return ClassificationReport(
        classification=classification,
        critical_points=critical,
        domain=domain,
        compact_inconsistency=inconsistent,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class RigidityReport:
    """Sampled evidence for the global rigidity statements.

    None means the predicate could not be evaluated (e.g. Ricci of an abstract fiber).
    """

    classification: Classification
    ricci_nonnegative: Optional[bool]
    ricci_positive: Optional[bool]
    scalar_nonnegative: bool
    locally_conformally_flat: bool
    product_rigidity: Optional[bool]
    scalar_dichotomy: Optional[bool]
    conformally_flat_class: Optional[str] = None
    notes: Tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["classification"] = self.classification.value
        out["notes"] = list(self.notes)
        return out


def _ricci_eigenvalue_range(profile, fiber, phi_min):
    n = fiber.fiber_dim + 1
    lo, hi = np.inf, -np.inf
    for row in profile.samples.itertuples(index=False):
        if abs(row.phi) <= phi_min:
            continue
        s = WarpingSample(r=row.r, phi=row.phi, dphi=row.dphi, ddphi=row.ddphi)
        ricci = ricci_closed_form(s, fiber, n)
        values = np.append(ricci.fiber_eigenvalues(), ricci.r11)
        lo, hi = min(lo, values.min()), max(hi, values.max())
    return lo, hi


def rigidity_report(
    profile: SolitonProfile,
    fiber: FiberGeometry,
    phi_min: float = DEFAULT_PHI_MIN,
    tol: float = 1.0e-8,
) -> RigidityReport:
    if profile.params is None:
        raise ProfileInputError("rigidity report needs profile parameters")
    params = profile.params
    classification = classify(profile, phi_min=phi_min).classification
    cylinder = classification == Classification.CYLINDER_TYPE
    scalar = profile.samples["R"].to_numpy()
    scalar_nonnegative = bool(np.all(scalar >= -tol))
    notes = []

    try:
        lo, _ = _ricci_eigenvalue_range(profile, fiber, phi_min)
        ricci_nonnegative = bool(lo >= -tol)
        ricci_positive = bool(lo > tol)
    except InsufficientFiberDataError:
        ricci_nonnegative = ricci_positive = None
        notes.append("fiber Ricci tensor unknown, Ricci predicates skipped")

    flat_slope = bool(np.all(np.abs(profile.dphi) <= tol * np.maximum(1.0, np.abs(profile.phi))))
    product_rigidity = None
    if cylinder and (ricci_nonnegative or (scalar_nonnegative and params.rbar <= 0)):
        product_rigidity = flat_slope

    scalar_dichotomy = None
    if cylinder and scalar_nonnegative:
        scalar_dichotomy = bool(
            params.rbar > 0 or (abs(params.rbar) <= tol and np.all(np.abs(scalar) <= tol))
        )

    conformally_flat_class = None
    if fiber.is_space_form:
        if classification == Classification.ROTATIONALLY_SYMMETRIC:
            conformally_flat_class = "rotationally-symmetric-Rn"
        elif cylinder:
            conformally_flat_class = "space-form-cylinder"

    return RigidityReport(
        classification=classification,
        ricci_nonnegative=ricci_nonnegative,
        ricci_positive=ricci_positive,
        scalar_nonnegative=scalar_nonnegative,
        locally_conformally_flat=fiber.is_space_form,
        product_rigidity=product_rigidity,
        scalar_dichotomy=scalar_dichotomy,
        conformally_flat_class=conformally_flat_class,
        notes=tuple(notes),
    )
