"""Aggregation of random AR(1) processes: moments, AR coefficients and long memory."""
import logging

__version__ = "1.0.0"

logging.getLogger("aggmem").addHandler(logging.NullHandler())
