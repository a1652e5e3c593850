""" Column accumulators for the tabular outputs (profiles, curvature dumps, plot data).
    Rather than converting each value seperately, these classes accumulate values (floats or the
    strings of a CSV line) into a list, and convert the list to a pandas Series when pd_parse()
    is called.
"""
from abc import ABC, abstractmethod
from functools import cached_property
from itertools import zip_longest

import numpy as np
import pandas as pd

from yamabepy.errors import ProfileInputError


class StringColumn(list):
    "Default parser list to hold a list of strings"

    def pd_parse(self) -> pd.Series:
        "Return a pandas series of the list"
        return pd.Series(self, dtype=object)


class FloatColumn(list):
    "Float parser, converts empty strings, 'nan' and None to NaN; 'inf' parses as infinity"

    def pd_parse(self) -> pd.Series:
        "Return a float64 pandas series of the list"
        x = np.array(self, dtype=object)
        mask = pd.isna(x) | (x == "") | (x == "nan")
        z = np.empty(x.shape, dtype=float)
        z[~mask] = x[~mask].astype(float)
        z[mask] = np.nan
        return pd.Series(z, dtype=float)


class BaseTable(ABC):
    "Row-wise accumulator over named columns; the column order is the attribute order"

    @abstractmethod
    def __init__(self):
        pass

    @cached_property
    def _colnames(self):
        return [key for key in vars(self).keys() if not key.startswith("_")]

    @cached_property
    def _columns(self):
        return [(var, data) for var, data in vars(self).items() if not var.startswith("_")]

    def _datacols(self):
        for _, data in self._columns:
            yield data

    def from_iterable(self, iterable):
        for row in iterable:
            self.append(row)
        return self

    def append(self, iterable):
        values = list(iterable)
        if len(values) > len(self._colnames):
            raise ProfileInputError(
                f"row has {len(values)} fields, table {type(self).__name__} has "
                f"{len(self._colnames)} columns"
            )
        for col, val in zip_longest(self._datacols(), values, fillvalue=""):
            col.append(val)

    def __len__(self):
        _, first = self._columns[0]
        return len(first)

    def to_dataframe(self) -> pd.DataFrame:
        columns = {}
        for name, column in self._columns:
            try:
                columns[name] = column.pd_parse()
            except ValueError as err:
                raise ProfileInputError(f"could not parse column {name}: {err}") from err
        return pd.DataFrame(columns, columns=self._colnames)


class ProfileTable(BaseTable):
    "Output columns of a soliton profile"

    def __init__(self):
        self.r = FloatColumn()
        self.phi = FloatColumn()
        self.dphi = FloatColumn()
        self.ddphi = FloatColumn()
        self.f = FloatColumn()
        self.R = FloatColumn()
        self.H = FloatColumn()


class CurvatureTable(BaseTable):
    "Closed-form curvature along r"

    def __init__(self):
        self.r = FloatColumn()
        self.R = FloatColumn()
        self.R11 = FloatColumn()
        self.Ric_fiber_min = FloatColumn()
        self.Ric_fiber_max = FloatColumn()
        self.weyl_max = FloatColumn()


class PlotTable(BaseTable):
    "Long-format (r, quantity, value) series for external plotting"

    def __init__(self):
        self.r = FloatColumn()
        self.quantity = StringColumn()
        self.value = FloatColumn()


PROFILE_HEADER = ProfileTable()._colnames
CURVATURE_HEADER = CurvatureTable()._colnames
PLOT_HEADER = PlotTable()._colnames
