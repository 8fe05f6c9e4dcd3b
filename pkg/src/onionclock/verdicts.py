"""Causal comparison verdicts shared by every clock construct."""

from __future__ import annotations

import enum

from . import _kernels


class CausalVerdict(enum.Enum):
    """Outcome of comparing clock x against clock y, from x's perspective.

    Indeterminate is reported only when no retained depth interval of one
    clock aligns with any interval of the other, i.e. the clocks' windows
    have drifted too far apart to say anything.
    """

    STRICTLY_AFTER = "strictly_after"
    AFTER_OR_EQUAL = "after_or_equal"
    STRICTLY_BEFORE = "strictly_before"
    BEFORE_OR_EQUAL = "before_or_equal"
    CONCURRENT = "concurrent"
    INDETERMINATE = "indeterminate"

    @property
    def is_causal(self) -> bool:
        """True for any verdict that claims an order between the operands."""
        return self in (
            CausalVerdict.STRICTLY_AFTER,
            CausalVerdict.AFTER_OR_EQUAL,
            CausalVerdict.STRICTLY_BEFORE,
            CausalVerdict.BEFORE_OR_EQUAL,
        )

    @property
    def claims_after(self) -> bool:
        return self in (CausalVerdict.STRICTLY_AFTER, CausalVerdict.AFTER_OR_EQUAL)

    @property
    def claims_before(self) -> bool:
        return self in (CausalVerdict.STRICTLY_BEFORE, CausalVerdict.BEFORE_OR_EQUAL)

    def flipped(self) -> "CausalVerdict":
        """The same verdict seen from the other operand."""
        flip = {
            CausalVerdict.STRICTLY_AFTER: CausalVerdict.STRICTLY_BEFORE,
            CausalVerdict.STRICTLY_BEFORE: CausalVerdict.STRICTLY_AFTER,
            CausalVerdict.AFTER_OR_EQUAL: CausalVerdict.BEFORE_OR_EQUAL,
            CausalVerdict.BEFORE_OR_EQUAL: CausalVerdict.AFTER_OR_EQUAL,
        }
        return flip.get(self, self)


CODE_TO_VERDICT = {
    _kernels.CODE_CONCURRENT: CausalVerdict.CONCURRENT,
    _kernels.CODE_AFTER: CausalVerdict.STRICTLY_AFTER,
    _kernels.CODE_BEFORE: CausalVerdict.STRICTLY_BEFORE,
    _kernels.CODE_AFTER_OR_EQUAL: CausalVerdict.AFTER_OR_EQUAL,
    _kernels.CODE_BEFORE_OR_EQUAL: CausalVerdict.BEFORE_OR_EQUAL,
}
