"""Granger cause selection over latent/speed time-series panels."""

from cimlab.causesel.fdist import f_cdf, regularized_incomplete_beta
from cimlab.causesel.ols import ols_fit
from cimlab.causesel.granger import (
    CauseSet,
    GrangerResult,
    SeriesPanel,
    build_lagged,
    granger_test,
    load_panel_csv,
    select_causes,
)

__all__ = [
    "f_cdf",
    "regularized_incomplete_beta",
    "ols_fit",
    "SeriesPanel",
    "GrangerResult",
    "CauseSet",
    "build_lagged",
    "granger_test",
    "select_causes",
    "load_panel_csv",
]
