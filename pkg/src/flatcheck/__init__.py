"""flatcheck: jet groupoid arithmetic and flatness checks for parallelisms."""

__version__ = "0.1.0"
