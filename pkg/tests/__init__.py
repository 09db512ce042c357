"""
Package initialization for the tests module.
"""

# This file makes the tests directory a Python package