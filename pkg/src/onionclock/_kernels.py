"""Kernel selection: numba-compiled fast path with a pure-numpy fallback.

Set ``ONIONCLOCK_NO_NUMBA=1`` to force the numpy path.  The numpy path is
also used automatically when numba is not importable.  Both paths produce
bit-identical results (integer arithmetic only); ``benchmarks/bench_kernels.py``
compares their throughput.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("ONIONCLOCK_NO_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

USING_NUMBA = False
if not _DISABLED:
    try:
        from ._kernels_numba import (  # noqa: F401
            bc_pair_codes,
            dominates,
            range_sum_ge,
            saturating_add,
            vc_pair_codes,
        )

        USING_NUMBA = True
    except ImportError:
        pass

if not USING_NUMBA:
    from ._kernels_numpy import (  # noqa: F401
        bc_pair_codes,
        dominates,
        range_sum_ge,
        saturating_add,
        vc_pair_codes,
    )

from ._kernels_numpy import (  # noqa: F401
    CODE_AFTER,
    CODE_AFTER_OR_EQUAL,
    CODE_BEFORE,
    CODE_BEFORE_OR_EQUAL,
    CODE_CONCURRENT,
)
