import pandas as pd
import numpy as np
import pytest

from yamabepy.errors import ProfileInputError
from yamabepy.tables import columns


def test_float_column():
    col = columns.FloatColumn()
    col.append("1")
    col.append("2.5")
    col.append(3.0)
    ret_series = col.pd_parse()
    exp_series = pd.Series([1, 2.5, 3], dtype=float)
    pd.testing.assert_series_equal(ret_series, exp_series)


def test_float_column_nan():
    col = columns.FloatColumn()
    col.append("1")
    col.append("")
    col.append("nan")
    col.append(None)
    col.append("inf")
    ret_series = col.pd_parse()
    exp_series = pd.Series([1, np.nan, np.nan, np.nan, np.inf], dtype=float)
    pd.testing.assert_series_equal(ret_series, exp_series)


def test_string_column():
    col = columns.StringColumn()
    col.append("phi")
    col.append("R")
    ret_series = col.pd_parse()
    exp_series = pd.Series(["phi", "R"], dtype=object)
    pd.testing.assert_series_equal(ret_series, exp_series)


def test_headers():
    assert columns.PROFILE_HEADER == ["r", "phi", "dphi", "ddphi", "f", "R", "H"]
    assert columns.CURVATURE_HEADER == [
        "r",
        "R",
        "R11",
        "Ric_fiber_min",
        "Ric_fiber_max",
        "weyl_max",
    ]
    assert columns.PLOT_HEADER == ["r", "quantity", "value"]


def test_table_from_iterable():
    table = columns.PlotTable().from_iterable([(0.0, "phi", "0.0"), (0.5, "phi", 0.5)])
    assert len(table) == 2
    frame = table.to_dataframe()
    assert list(frame.columns) == columns.PLOT_HEADER
    assert frame["value"].tolist() == [0.0, 0.5]
    assert frame["quantity"].tolist() == ["phi", "phi"]


def test_short_rows_are_padded():
    table = columns.ProfileTable()
    table.append(["0.1", "0.2"])
    frame = table.to_dataframe()
    assert frame["phi"].iloc[0] == 0.2
    assert np.isnan(frame["H"].iloc[0])


def test_table_errors():
    table = columns.PlotTable()
    with pytest.raises(ProfileInputError):
        table.append([0.0, "phi", 1.0, "extra"])
    table.append(["0.0", "phi", "not-a-number"])
    with pytest.raises(ProfileInputError):
        table.to_dataframe()
