"""Tests of time-zero efficiency between electricity swaps and their
replicating portfolios."""

__version__ = "0.1.0"

from .contract_calendar import Adjustment, ContinuousSeries, Contract, ContractLabel, Segment
from .errors import TzeffError
from .ingest import Panel, PriceObservation, read_price_file
from .kernels import BACKEND
from .replication import WeightMode, WeightScheme, composition_for, replicate

__all__ = [
    "Adjustment", "BACKEND", "ContinuousSeries", "Contract", "ContractLabel", "Panel",
    "PriceObservation", "Segment", "TzeffError", "WeightMode", "WeightScheme",
    "composition_for", "read_price_file", "replicate",
]
