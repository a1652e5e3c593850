"""
Read and write profile, curvature and plot tables as CSV or JSON.

Output is byte-reproducible: floats use the shortest round-trip decimal form (``repr``), lines end
in ``\\n`` and nothing depends on the locale.
"""
import io
import json
import math
import warnings
from pathlib import Path

import numpy as np
import pandas as pd

from yamabepy.errors import ConfigError, ProfileInputError
from yamabepy.soliton.profile import (
    SAMPLE_COLUMNS,
    Classification,
    ProfileDomain,
    SolitonParams,
    SolitonProfile,
)
from yamabepy.tables.columns import PROFILE_HEADER, ProfileTable

FORMATS = ("csv", "json")


def format_value(value) -> str:
    "Shortest round-trip text for floats ('inf', '-inf', 'nan' for non-finite values)"
    if isinstance(value, str):
        return value
    return repr(float(value))


def _json_value(value):
    if isinstance(value, str):
        return value
    value = float(value)
    return value if math.isfinite(value) else None


def _check_format(fmt):
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}, expected one of {FORMATS}")


def write_table(outf, frame: pd.DataFrame, fmt: str = "csv", extra: dict = None):
    """Write ``frame`` to the text stream ``outf``.

    JSON output holds each column as an array under "columns", with ``extra`` merged at the top
    level; non-finite floats become null.
    """
    _check_format(fmt)
    if fmt == "csv":
        outf.write(",".join(frame.columns) + "\n")
        for row in frame.itertuples(index=False):
            outf.write(",".join(format_value(value) for value in row) + "\n")
        return
    document = dict(extra or {})
    document["columns"] = {
        name: [_json_value(value) for value in frame[name].tolist()] for name in frame.columns
    }
    outf.write(json.dumps(document, indent=1, allow_nan=False) + "\n")


def profile_document(profile: SolitonProfile) -> dict:
    "Metadata carried alongside the columns of a JSON profile"
    return {
        "params": None if profile.params is None else profile.params.to_dict(),
        "classification": profile.classification.value,
        "domain": profile.domain.to_dict(),
        "reflected": profile.reflected,
        "notes": list(profile.notes),
    }


def write_profile(outf, profile: SolitonProfile, fmt: str = "csv", n: int = None):
    "Write the r,phi,dphi,ddphi,f,R,H table of ``profile``"
    write_table(outf, profile.to_frame(n), fmt, extra=profile_document(profile))


def _open_text(fname):
    return open(Path(fname), mode="rt", encoding="utf-8", newline="\n")


def _read_csv(io_file) -> pd.DataFrame:
    header = io_file.readline().rstrip("\n").split(",")
    missing = [col for col in SAMPLE_COLUMNS if col not in header]
    if missing:
        raise ProfileInputError(f"profile CSV header {header} lacks {missing}")
    table = ProfileTable()
    order = [header.index(col) if col in header else None for col in PROFILE_HEADER]
    for lineno, line in enumerate(io_file, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != len(header):
            raise ProfileInputError(
                f"line {lineno} has {len(fields)} fields, the header has {len(header)}"
            )
        table.append(["" if idx is None else fields[idx] for idx in order])
    return table.to_dataframe()


def _read_json(fname, text) -> dict:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as err:
        raise ProfileInputError(f"{fname} is not valid JSON: {err}") from err
    if not isinstance(document, dict) or not isinstance(document.get("columns"), dict):
        raise ProfileInputError(f"{fname} has no \"columns\" mapping")
    return document


def _json_frame(fname, document) -> pd.DataFrame:
    columns = document["columns"]
    if len({len(values) if isinstance(values, list) else -1 for values in columns.values()}) > 1:
        raise ProfileInputError(f"{fname} has columns of different lengths")
    try:
        return pd.DataFrame(
            {name: pd.Series(values, dtype=float) for name, values in columns.items()}
        )
    except (TypeError, ValueError) as err:
        raise ProfileInputError(f"{fname} has non-numeric columns: {err}") from err


def read_profile(fname, params: SolitonParams = None) -> SolitonProfile:
    """Read a profile written by ``write_profile`` (format from the file suffix or content).

    ``params`` overrides (or supplies, for CSV) the soliton parameters. CSV files carry no
    endpoint information, so both ends are taken as integration limits.
    """
    try:
        with _open_text(fname) as io_file:
            text = io_file.read()
    except UnicodeDecodeError as err:
        raise ProfileInputError(f"{fname} is not UTF-8 text: {err}") from err
    if Path(fname).suffix == ".json" or text.startswith("{"):
        document = _read_json(fname, text)
        frame = _json_frame(fname, document)
        meta_params = document.get("params")
        domain = document.get("domain")
        classification = document.get("classification", Classification.UNDETERMINED)
        reflected = bool(document.get("reflected", False))
        notes = tuple(document.get("notes", ()))
    else:
        frame = _read_csv(io.StringIO(text))
        meta_params = domain = None
        classification = Classification.UNDETERMINED
        reflected = False
        notes = ()

    if not len(frame):
        raise ProfileInputError(f"{fname} contains no samples")
    missing = [col for col in SAMPLE_COLUMNS if col not in frame.columns]
    if missing:
        raise ProfileInputError(f"{fname} lacks columns {missing}")
    try:
        if params is None and meta_params is not None:
            params = SolitonParams.from_dict(meta_params)
        if domain is not None:
            domain = ProfileDomain.from_dict(domain)
        classification = Classification(classification)
    except (KeyError, TypeError, ValueError) as err:
        raise ProfileInputError(f"{fname} has malformed metadata: {err}") from err
    if params is None:
        warnings.warn(f"{fname} carries no soliton parameters")

    frame = frame[SAMPLE_COLUMNS]
    if domain is None:
        r = frame["r"].to_numpy()
        domain = ProfileDomain(start=float(np.min(r)), end=float(np.max(r)))
    return SolitonProfile(
        params=params,
        samples=frame.reset_index(drop=True),
        domain=domain,
        classification=classification,
        reflected=reflected,
        notes=notes,
    )
