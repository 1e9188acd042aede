"""Curriculum-trained PPO lidar navigation plus formal policy verification."""

__version__ = "0.1.0"

from .kernels import COMPILED  # noqa: F401
