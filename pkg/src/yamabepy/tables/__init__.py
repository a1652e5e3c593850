from .columns import CurvatureTable, PlotTable, ProfileTable
from .profile_io import read_profile, write_profile, write_table
