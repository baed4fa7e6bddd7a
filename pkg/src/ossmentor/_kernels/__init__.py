"""Hot-path MLP kernels with a compiled core and a pure-numpy fallback.

The compiled extension is selected at import time unless the environment
variable ``OSSMENTOR_PURE`` is set (any non-empty value), or the extension
failed to build.
"""

import os

if os.environ.get("OSSMENTOR_PURE"):
    from ._pure import (
        one_head_backward,
        one_head_forward,
        two_head_backward,
        two_head_forward,
    )

    BACKEND = "pure"
else:
    try:
        from ._fast import (  # type: ignore[no-redef]
            one_head_backward,
            one_head_forward,
            two_head_backward,
            two_head_forward,
        )

        BACKEND = "cython"
    except ImportError:
        from ._pure import (  # type: ignore[no-redef]
            one_head_backward,
            one_head_forward,
            two_head_backward,
            two_head_forward,
        )

        BACKEND = "pure"

__all__ = [
    "BACKEND",
    "one_head_backward",
    "one_head_forward",
    "two_head_backward",
    "two_head_forward",
]
