"""Symmetric and asymmetric joins of finite metric spaces and hyperbolic graphs."""

__version__ = "0.1.0"
