"""
Package initialization for the evaluation runners.
"""
