"""
Package initialization for the evaluation module.
"""
