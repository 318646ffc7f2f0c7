"""Static figures from Landau-Coulomb run time series."""

from .csvdata import SchemaError, TimeSeriesData, read_timeseries
from .figures import FIGURES, PlotSpec, reference_envelope, render

__version__ = "0.1.0"
