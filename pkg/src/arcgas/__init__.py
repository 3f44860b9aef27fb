"""Log-gases on Jordan arcs: conformal data, Grunsky operators, energies and sampling."""

__version__ = "0.1.0"
