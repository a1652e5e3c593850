"""
Command line front end.

    yamabepy solve --n 3 --rho 0 --Rbar 2 --origin --kappa 1 --rmax 50 -o steady.csv
    yamabepy classify steady.csv
    yamabepy curvature steady.csv --fiber sphere
    yamabepy verify --checks soliton_residual,umbilicity
    yamabepy plot-data steady.csv --quantities phi,R

Exit codes: 0 success, 1 verification failed, 2 usage or configuration error, 3 numerical failure.
"""
import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd
import yaml

from yamabepy.errors import (
    ConfigError,
    DimensionError,
    DomainError,
    InsufficientFiberDataError,
    NoSmoothClosingError,
    ProfileInputError,
    SingularStateError,
    UnknownCheckError,
    YamabeError,
)
from yamabepy.soliton.classify import DEFAULT_SLOPE_TOL, classify
from yamabepy.soliton.ode import (
    DEFAULT_SERIES_ORDER,
    Direction,
    IntegrationLimits,
    OriginStart,
    integrate,
)
from yamabepy.soliton.profile import ProfileState, SolitonParams
from yamabepy.tables.columns import CURVATURE_HEADER, PLOT_HEADER, CurvatureTable, PlotTable
from yamabepy.tables.profile_io import FORMATS, read_profile, write_profile, write_table
from yamabepy.tensor.core import DEFAULT_STEP
from yamabepy.verify.catalog import (
    DEFAULT_FIBER_POINTS,
    DEFAULT_TOLERANCE,
    run_suite,
    verify_profile,
)
from yamabepy.warped.fibers import FiberGeometry, fiber_from_name
from yamabepy.warped.geometry import WarpingSample, ricci_closed_form, scalar_closed_form
from yamabepy.warped.geometry import weyl_closed_form

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CONFIG_ERRORS = (
    ConfigError,
    UnknownCheckError,
    ProfileInputError,
    InsufficientFiberDataError,
    NoSmoothClosingError,
    DimensionError,
    DomainError,
    SingularStateError,
)

PLOT_QUANTITIES = ("phi", "dphi", "ddphi", "f", "R", "H")

# config-file spellings that differ from the RunConfig field names
KEY_ALIASES = {"Rbar": "rbar", "rmax": "r_max", "rmin": "r_min", "step": "h"}


@dataclass(frozen=True)
class RunConfig:
    "Every parameter of every subcommand; unset values are None"

    command: str
    n: Optional[int] = None
    rho: Optional[float] = None
    rbar: Optional[float] = None
    origin: bool = False
    kappa: Optional[float] = None
    order: int = DEFAULT_SERIES_ORDER
    phi0: Optional[float] = None
    p0: float = 0.0
    r0: float = 0.0
    direction: str = Direction.FORWARD.value
    r_max: float = 10.0
    r_min: Optional[float] = None
    phi_min: float = 1.0e-8
    phi_max: float = 1.0e8
    p_max: float = 1.0e8
    rtol: float = 1.0e-10
    atol: float = 1.0e-12
    sample_step: float = 0.01
    max_step: float = np.inf
    slope_tol: float = DEFAULT_SLOPE_TOL
    profile: Optional[str] = None
    fiber: str = "sphere"
    factors: Optional[Tuple[Tuple[int, float], ...]] = None
    window: Optional[Tuple[float, float]] = None
    checks: Optional[Tuple[str, ...]] = None
    h: float = DEFAULT_STEP
    tolerance: float = DEFAULT_TOLERANCE
    fiber_points: int = DEFAULT_FIBER_POINTS
    quantities: Tuple[str, ...] = ("phi",)
    format: str = "csv"
    output: Optional[str] = None

    def __post_init__(self):
        if self.n is not None and (int(self.n) != self.n or self.n < 3):
            raise ConfigError(f"n must be an integer >= 3, got {self.n}")
        for name in ("rtol", "atol", "sample_step", "max_step", "h", "tolerance", "phi_min"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.r_max > 0:
            raise ConfigError(f"r_max must be positive, got {self.r_max}")
        if self.fiber_points < 1:
            raise ConfigError(f"fiber_points must be >= 1, got {self.fiber_points}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.direction not in {d.value for d in Direction}:
            raise ConfigError(f"unknown direction {self.direction!r}")
        unknown = [q for q in self.quantities if q not in PLOT_QUANTITIES]
        if unknown:
            raise ConfigError(f"unknown quantities {unknown}, expected some of {PLOT_QUANTITIES}")
        if self.window is not None and not self.window[0] < self.window[1]:
            raise ConfigError(f"empty window {self.window}")

    @classmethod
    def from_sources(cls, command: str, file_values: dict, flag_values: dict) -> "RunConfig":
        "Defaults, overridden by config-file values, overridden by explicit flags"
        names = {field.name for field in fields(cls)} - {"command"}
        values = {}
        for key, value in (file_values or {}).items():
            key = KEY_ALIASES.get(key, key)
            if key not in names:
                raise ConfigError(f"unknown configuration key {key!r}")
            values[key] = value
        values.update({key: value for key, value in flag_values.items() if value is not None})
        return cls(command=command, **_coerce(values))

    def params(self, fallback: Optional[SolitonParams] = None) -> SolitonParams:
        if self.n is None and self.rho is None and self.rbar is None and fallback is not None:
            return fallback
        base = fallback.to_dict() if fallback is not None else {}
        n = self.n if self.n is not None else base.get("n")
        rho = self.rho if self.rho is not None else base.get("rho")
        rbar = self.rbar if self.rbar is not None else base.get("Rbar")
        if n is None or rho is None or rbar is None:
            raise ConfigError("--n, --rho and --Rbar are required")
        return SolitonParams(n=n, rho=rho, rbar=rbar)

    def limits(self) -> IntegrationLimits:
        return IntegrationLimits(
            r_max=self.r_max,
            r_min=self.r_min,
            phi_min=self.phi_min,
            phi_max=self.phi_max,
            p_max=self.p_max,
            rtol=self.rtol,
            atol=self.atol,
            sample_step=self.sample_step,
            max_step=self.max_step,
        )

    def fiber_geometry(self, n: int, rbar: Optional[float] = None) -> FiberGeometry:
        "Fiber of dimension n - 1; its scalar curvature must equal the profile's Rbar"
        fiber = fiber_from_name(
            self.fiber,
            n - 1,
            kappa=self.kappa,
            factors=self.factors,
            scalar_curvature=rbar,
        )
        if rbar is not None and not np.isclose(
            fiber.scalar_curvature, rbar, rtol=1e-9, atol=1e-12
        ):
            raise ConfigError(
                f"{fiber.kind.value} fiber has scalar curvature {fiber.scalar_curvature:g} but the "
                f"profile has Rbar={rbar:g}; adjust --kappa or --factors"
            )
        return fiber


def _split(text):
    return tuple(part.strip() for part in str(text).split(",") if part.strip())


def _coerce(values: dict) -> dict:
    "Normalize list-valued options given as comma separated strings (flags) or lists (YAML)"
    out = dict(values)
    try:
        if isinstance(out.get("checks"), str):
            out["checks"] = _split(out["checks"])
        if isinstance(out.get("quantities"), str):
            out["quantities"] = _split(out["quantities"])
        for key in ("checks", "quantities"):
            if out.get(key) is not None:
                out[key] = tuple(out[key])
        if isinstance(out.get("window"), str):
            out["window"] = tuple(float(x) for x in _split(out["window"]))
        if out.get("window") is not None:
            out["window"] = tuple(float(x) for x in out["window"])
            if len(out["window"]) != 2:
                raise ConfigError(f"window needs two values, got {out['window']}")
        if isinstance(out.get("factors"), str):
            out["factors"] = tuple(
                (int(dim), float(radius))
                for dim, radius in (item.split(":") for item in _split(out["factors"]))
            )
        if out.get("factors") is not None:
            out["factors"] = tuple((int(dim), float(radius)) for dim, radius in out["factors"])
        for key in ("rho", "rbar", "kappa", "phi0", "p0", "r0", "r_max", "r_min", "phi_min",
                    "phi_max", "p_max", "rtol", "atol", "sample_step", "max_step", "slope_tol",
                    "h", "tolerance"):
            if out.get(key) is not None:
                out[key] = float(out[key])
        for key in ("n", "order", "fiber_points"):
            if out.get(key) is not None:
                out[key] = int(out[key])
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"invalid configuration value: {err}") from err
    return out


def load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        with open(Path(path), mode="rt", encoding="utf-8") as io_file:
            data = yaml.safe_load(io_file)
    except (OSError, yaml.YAMLError) as err:
        raise ConfigError(f"could not read config {path}: {err}") from err
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping of option names to values")
    return data


@contextmanager
def _output(config: RunConfig):
    if config.output is None:
        yield sys.stdout
        return
    with open(Path(config.output), mode="wt", encoding="utf-8", newline="\n") as outf:
        yield outf


def _read_profile(config: RunConfig):
    if config.profile is None:
        raise ConfigError("a profile file is required")
    try:
        if config.n is not None and config.rho is not None and config.rbar is not None:
            profile = read_profile(config.profile, params=config.params())
        else:
            profile = read_profile(config.profile)
    except OSError as err:
        raise ConfigError(f"could not read profile {config.profile}: {err}") from err
    if config.n is not None or config.rho is not None or config.rbar is not None:
        profile = replace(profile, params=config.params(profile.params))
    return profile


# -- subcommands --------------------------------------------------------------------------------


def cmd_solve(config: RunConfig) -> int:
    params = config.params()
    if config.origin:
        init = OriginStart(kappa=1.0 if config.kappa is None else config.kappa, order=config.order)
    elif config.phi0 is not None:
        init = ProfileState(r=config.r0, phi=config.phi0, p=config.p0)
    else:
        raise ConfigError("give --origin or an initial state --phi0 [--p0 --r0]")
    profile = integrate(params, init, config.direction, config.limits())
    logger.info("solved %d samples, %s", len(profile), profile.classification.value)
    with _output(config) as outf:
        write_profile(outf, profile, config.format, n=params.n)
    return EXIT_OK


def cmd_classify(config: RunConfig) -> int:
    profile = _read_profile(config)
    report = classify(profile, phi_min=config.phi_min, slope_tol=config.slope_tol)
    with _output(config) as outf:
        outf.write(json.dumps(report.to_dict(), indent=1, allow_nan=False) + "\n")
    return EXIT_OK


def curvature_frame(profile, fiber: FiberGeometry, n: int, phi_min: float) -> pd.DataFrame:
    """Closed-form curvature per sample; rows with phi at a critical point are skipped.

    weyl_max is the largest coordinate component of W at the fiber chart center (gbar = identity).
    """
    center = np.zeros(fiber.fiber_dim)

    def rows():
        for row in profile.samples.itertuples(index=False):
            if abs(row.phi) <= phi_min:
                continue
            s = WarpingSample(r=row.r, phi=row.phi, dphi=row.dphi, ddphi=row.ddphi)
            ricci = ricci_closed_form(s, fiber, n)
            scalar = scalar_closed_form(s, fiber.scalar_curvature, n)
            if fiber.has_coordinates:
                eigen = ricci.fiber_eigenvalues()
                ric_min, ric_max = float(eigen.min()), float(eigen.max())
                weyl = weyl_closed_form(s, fiber, n).tensor_at(center)
                weyl_max = float(np.abs(weyl).max())
            else:
                ric_min = ric_max = weyl_max = np.nan
            yield row.r, scalar, ricci.r11, ric_min, ric_max, weyl_max

    return CurvatureTable().from_iterable(rows()).to_dataframe()[CURVATURE_HEADER]


def cmd_curvature(config: RunConfig) -> int:
    profile = _read_profile(config)
    n = config.n if config.n is not None else getattr(profile.params, "n", None)
    if n is None:
        raise ConfigError("the profile carries no dimension, pass --n")
    rbar = config.rbar if config.rbar is not None else getattr(profile.params, "rbar", None)
    fiber = config.fiber_geometry(n, rbar)
    frame = curvature_frame(profile, fiber, n, config.phi_min)
    with _output(config) as outf:
        write_table(outf, frame, config.format, extra={"fiber": fiber.describe()})
    return EXIT_OK


def _default_window(profile, phi_min):
    "Profile domain with 10% trimmed at each end (and any critical-point sample excluded)"
    samples = profile.samples[profile.samples["phi"].abs() > phi_min]
    lo, hi = float(samples["r"].min()), float(samples["r"].max())
    span = hi - lo
    return lo + 0.1 * span, hi - 0.1 * span


def cmd_verify(config: RunConfig) -> int:
    if config.profile is None:
        report = run_suite(config.checks, config.h, config.tolerance, config.fiber_points)
    else:
        profile = _read_profile(config)
        if profile.params is None:
            raise ConfigError("verifying a profile needs --n, --rho and --Rbar")
        fiber = config.fiber_geometry(profile.params.n, profile.params.rbar)
        window = config.window or _default_window(profile, config.phi_min)
        report = verify_profile(
            profile, fiber, window, config.checks, config.h, config.tolerance, config.fiber_points
        )
    with _output(config) as outf:
        outf.write(report.to_json())
    for failure in report.failures():
        logger.error("check %s failed: %.3e > %.1e", failure.name, failure.residual,
                     failure.tolerance)
    return EXIT_OK if report.overall_pass else EXIT_VERIFICATION_FAILED


def plot_frame(profile, quantities, n=None) -> pd.DataFrame:
    "Long-format r,quantity,value rows, one block per quantity, values as written by solve"
    frame = profile.samples.reset_index(drop=True)
    frame = frame.assign(f=frame["f"] - frame["f"].iloc[0])
    if "H" in quantities:
        frame = frame.assign(H=profile.mean_curvature(n))
    rows = (
        (r, quantity, value)
        for quantity in quantities
        for r, value in zip(frame["r"].tolist(), frame[quantity].tolist())
    )
    return PlotTable().from_iterable(rows).to_dataframe()[PLOT_HEADER]


def cmd_plot_data(config: RunConfig) -> int:
    profile = _read_profile(config)
    frame = plot_frame(profile, config.quantities, config.n)
    with _output(config) as outf:
        write_table(outf, frame, config.format)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "classify": cmd_classify,
    "curvature": cmd_curvature,
    "verify": cmd_verify,
    "plot-data": cmd_plot_data,
}


# -- argument parsing ---------------------------------------------------------------------------


def _common(parser, formats=True):
    parser.add_argument("--config", help="YAML file of option values; flags override it")
    parser.add_argument("-o", "--output", help="Output file. Default: standard output")
    if formats:
        parser.add_argument("--format", choices=FORMATS, help="Output format. Default: csv")
    parser.add_argument(
        "-v", "--verbose", action="store_true", default=False, help="Debug logging on stderr"
    )


def _soliton_flags(parser):
    parser.add_argument("--n", type=int, help="Dimension of the soliton (>= 3)")
    parser.add_argument("--rho", type=float, help="Soliton constant (>0 shrinking, <0 expanding)")
    parser.add_argument("--Rbar", dest="rbar", type=float, help="Scalar curvature of the fiber")


def _fiber_flags(parser):
    parser.add_argument(
        "--fiber",
        choices=("sphere", "hyperbolic", "flat", "product", "abstract"),
        help="Fiber of the warped product. Default: sphere",
    )
    parser.add_argument("--kappa", type=float, help="Sectional curvature of a space-form fiber")
    parser.add_argument(
        "--factors", help="Sphere factors of a product fiber as dim:radius,dim:radius"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yamabepy", description="Gradient Yamabe soliton profiles and curvature checks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Integrate a soliton profile")
    _common(solve)
    _soliton_flags(solve)
    solve.add_argument(
        "--origin", action="store_true", default=None, help="Start at a critical point of f"
    )
    solve.add_argument("--kappa", type=float, help="Curvature of the round fiber (origin start)")
    solve.add_argument("--order", type=int, help="Origin series order. Default: 7")
    solve.add_argument("--phi0", type=float, help="Initial phi = f'")
    solve.add_argument("--p0", type=float, help="Initial phi' = R - rho. Default: 0")
    solve.add_argument("--r0", type=float, help="Initial r. Default: 0")
    solve.add_argument(
        "--direction",
        choices=[d.value for d in Direction],
        help="Integrate forward, backward or both ways from the initial state",
    )
    solve.add_argument("--rmax", dest="r_max", type=float, help="Forward limit. Default: 10")
    solve.add_argument("--rmin", dest="r_min", type=float, help="Backward limit. Default: -rmax")
    solve.add_argument("--phi-min", dest="phi_min", type=float, help="Critical-point threshold")
    solve.add_argument("--phi-max", dest="phi_max", type=float, help="Blow-up threshold on phi")
    solve.add_argument("--p-max", dest="p_max", type=float, help="Blow-up threshold on |phi'|")
    solve.add_argument("--rtol", type=float, help="Relative tolerance. Default: 1e-10")
    solve.add_argument("--atol", type=float, help="Absolute tolerance. Default: 1e-12")
    solve.add_argument("--sample-step", dest="sample_step", type=float, help="Output spacing")
    solve.add_argument("--max-step", dest="max_step", type=float, help="Largest integrator step")

    classify_ = sub.add_parser("classify", help="Classify a profile file (JSON report)")
    classify_.add_argument("profile", help="Profile CSV or JSON written by solve")
    _common(classify_, formats=False)
    classify_.add_argument(
        "--phi-min", dest="phi_min", type=float, help="Critical-point threshold on |phi|"
    )
    classify_.add_argument(
        "--slope-tol", dest="slope_tol", type=float, help="Tolerance for a constant end slope"
    )

    curvature = sub.add_parser("curvature", help="Closed-form curvature along a profile")
    curvature.add_argument("profile", help="Profile CSV or JSON written by solve")
    _common(curvature)
    _soliton_flags(curvature)
    _fiber_flags(curvature)
    curvature.add_argument(
        "--phi-min", dest="phi_min", type=float, help="Skip samples with |phi| at or below this"
    )

    verify = sub.add_parser("verify", help="Run the verification suite (JSON report)")
    _common(verify, formats=False)
    verify.add_argument("--checks", help="Comma separated subset of checks")
    verify.add_argument("--profile", help="Verify the chart built from this profile instead")
    _soliton_flags(verify)
    _fiber_flags(verify)
    verify.add_argument("--window", help="r-window lo,hi of the profile chart")
    verify.add_argument("--h", dest="h", type=float, help="Finite-difference step. Default: 1e-3")
    verify.add_argument("--tolerance", type=float, help="Residual tolerance. Default: 1e-5")
    verify.add_argument(
        "--fiber-points", dest="fiber_points", type=int, help="Fiber points per radial level"
    )
    verify.add_argument(
        "--phi-min",
        dest="phi_min",
        type=float,
        help="Samples with |phi| at or below this are kept out of the default window",
    )

    plot = sub.add_parser("plot-data", help="Long-format r,quantity,value table")
    plot.add_argument("profile", help="Profile CSV or JSON written by solve")
    _common(plot)
    plot.add_argument("--quantities", help=f"Comma separated subset of {','.join(PLOT_QUANTITIES)}")
    plot.add_argument("--n", type=int, help="Dimension, when the profile file has none")
    return parser


def configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    logging.captureWarnings(True)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = vars(args)
    command = flags.pop("command")
    verbose = flags.pop("verbose")
    config_path = flags.pop("config")
    configure_logging(verbose)
    try:
        config = RunConfig.from_sources(command, load_config_file(config_path), flags)
        return COMMANDS[command](config)
    except CONFIG_ERRORS as err:
        logger.error("%s", err)
        return EXIT_CONFIG
    except YamabeError as err:
        logger.error("numerical failure: %s", err)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
