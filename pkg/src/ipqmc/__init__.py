"""Explicit inversive quasi-Monte Carlo point sets over finite fields."""

from .field import FieldSpec, field_of_order, make_field
from .pointset import PeriodTConfig, SizeQConfig, period_t, size_q

__version__ = "0.1.0"

__all__ = ["FieldSpec", "PeriodTConfig", "SizeQConfig", "field_of_order", "make_field", "period_t", "size_q"]
