"""
Package initialization for the pipeline module.
"""
from .frame_processor import FrameProcessor, HorizonMode

__all__ = ["FrameProcessor", "HorizonMode"]
