"""Rate bounds, source classification and desk-scale codecs for the
three-user finite-field multi-way relay channel with correlated sources."""

__version__ = "0.1.0"
