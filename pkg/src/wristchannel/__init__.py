"""Wrist-gesture covert channel toolkit.

End-to-end simulation and analysis of a smartwatch-based covert channel for
multiple-choice exam answers: synthetic gyroscope gesture data, pause-based
protocol decoding, feature extraction and symbol classification, haptic and
visual answer-delivery codecs, and a probabilistic model of the resulting
exam-outcome boost.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
