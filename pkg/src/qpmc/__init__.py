"""Model checking for quantum pushdown systems against PCTL and bounded PCTL."""

__version__ = "0.1.0"
