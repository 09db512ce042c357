"""
Package initialization for the groundprior module.
"""

__version__ = "0.1.0"
