"""Hausdorff dimension of subgroups of standard groups over pro-p rings."""

__version__ = "0.1.0"
