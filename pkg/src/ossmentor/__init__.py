"""OSS Mentor pipeline: entropy-weighted contribution scoring, a
contributor-pool RL environment, and a batch-updating clipped-surrogate
policy trainer with an experiment harness."""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
