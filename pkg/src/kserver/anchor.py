"""The anchor: a stabilizing suffix of round-robin requests.

Appending enough cycles over the start configuration forces both the
offline optimum and any competitive lazy online algorithm back to where
they started, which makes repetitions of the combined block behave as
independent runs.  The cycle count is computed with exact integer
arithmetic from the base sequence's optimal cost, the assumed competitive
ratio and the assumed additive allowance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .metric import InputError, Instance, min_pairwise_distance
from .offline import opt_cost
from .workfunction import final_work_vector


@dataclass(frozen=True)
class AnchorSpec:
    """Anchor parameters and the concrete request suffix.

    ``min_gap`` is the smallest distance between two distinct start points;
    ``cycles`` the number of round-robin passes; ``requests`` the suffix
    itself (start points in ascending order, repeated ``cycles`` times).
    """

    min_gap: int
    cycles: int
    alpha: int
    beta: int
    requests: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "ell": self.min_gap,
            "m": self.cycles,
            "alpha": self.alpha,
            "beta": self.beta,
            "sigma": list(self.requests),
        }


def _ceil_div(numerator: int, denominator: int) -> int:
    return -(-numerator // denominator)


def compute_anchor(inst: Instance, alpha: int, beta: int) -> AnchorSpec:
    """Build the anchor for an instance under assumed ratio and allowance.

    The cycle count is one more than the exact ceiling of the larger of
    ``2*k*opt/gap + k^2`` and ``(2*alpha*opt + beta)/gap``, which makes
    both guarantees below strict.
    """
    if not isinstance(alpha, int) or isinstance(alpha, bool) or alpha < 1:
        raise InputError(f"alpha must be a positive integer, got {alpha!r}")
    if not isinstance(beta, int) or isinstance(beta, bool) or beta < 0:
        raise InputError(f"beta must be a nonnegative integer, got {beta!r}")
    if inst.k < 2:
        raise InputError("anchors need k >= 2 (no pairwise gap with one server)")
    gap = min_pairwise_distance(inst.initial, inst.metric)
    opt = opt_cost(final_work_vector(inst))
    k = inst.k
    cycles = (
        max(
            _ceil_div(2 * k * opt, gap) + k * k,
            _ceil_div(2 * alpha * opt + beta, gap),
        )
        + 1
    )
    if not (cycles * gap > 2 * alpha * opt + beta):
        raise RuntimeError("cycle count fails its ratio guarantee")
    if not (cycles * gap > 2 * k * opt + k * k * gap):
        raise RuntimeError("cycle count fails its return guarantee")
    return AnchorSpec(gap, cycles, alpha, beta, inst.initial * cycles)


def build_chi(requests, anchor_requests, repetitions: int) -> tuple[int, ...]:
    """The combined block (base requests then anchor), repeated."""
    if not isinstance(repetitions, int) or isinstance(repetitions, bool) or repetitions < 1:
        raise InputError(f"repetition count must be a positive integer, got {repetitions!r}")
    block = tuple(requests) + tuple(anchor_requests)
    return block * repetitions
