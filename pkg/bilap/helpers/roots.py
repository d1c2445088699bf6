"""
Safeguarded root finding for functions increasing on (0, inf).

Both the continuum secular function and its finite-grid analogue are searched in the
distance to the nearest band edge, where they are monotone increasing: negative close
to the edge (an eigenvalue exists) and tending to 1 far away.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

from bilap.helpers.exceptions import BracketFailure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float
    evaluations: int


@dataclass(frozen=True)
class RootResult:
    root: float
    value: float
    lo: float
    hi: float
    iterations: int


def expand_bracket(
    func: Callable[[float], float],
    start: float,
    shrink: float = 10.0,
    grow: float = 2.0,
    max_steps: int = 200,
    floor: float = 1e-300,
    ceiling: float = 1e300,
) -> Bracket:
    """
    Finds lo < hi with func(lo) < 0 < func(hi) for an increasing func.
    The distance close to the edge is shrunk geometrically, the far one is doubled.
    A point where func vanishes exactly is stepped over, so both ends keep a strict sign
    :param func:
    :param start: first distance tried
    :param shrink: factor the near end is divided by per step
    :param grow: factor the far end is multiplied by per step
    :param max_steps:
    :param floor: smallest distance tried before giving up
    :param ceiling: largest distance tried before giving up
    :return:
    """
    evaluations = 1
    f_start = func(start)
    lo, f_lo = start, f_start
    hi, f_hi = start, f_start
    if f_start >= 0:
        while f_lo >= 0:
            if f_lo > 0:
                hi, f_hi = lo, f_lo
            lo /= shrink
            if lo < floor or evaluations > max_steps:
                raise BracketFailure(f"function stays non-negative down to distance {lo:.3e}")
            f_lo = func(lo)
            evaluations += 1
    while f_hi <= 0:
        if f_hi < 0:
            lo, f_lo = hi, f_hi
        hi *= grow
        if hi > ceiling or evaluations > max_steps:
            raise BracketFailure(f"function stays non-positive up to distance {hi:.3e}")
        f_hi = func(hi)
        evaluations += 1
    logger.debug("bracket [%.6e, %.6e] after %d evaluations", lo, hi, evaluations)
    return Bracket(lo=lo, hi=hi, f_lo=f_lo, f_hi=f_hi, evaluations=evaluations)


def _split(lo: float, hi: float) -> float:
    if hi > 2.0 * lo:
        return math.sqrt(lo * hi)
    return 0.5 * (lo + hi)


def bisect_newton(
    func: Callable[[float], float],
    deriv: Optional[Callable[[float], float]],
    lo: float,
    hi: float,
    rel_width: float,
    newton_steps: int = 3,
    max_steps: int = 400,
    until_ratio: Optional[float] = None,
) -> RootResult:
    """
    Bisection of an increasing function on [lo, hi] (geometric while the bracket spans
    more than a factor 2), followed by at most ``newton_steps`` Newton steps that are
    only accepted inside the final bracket and when they reduce |func|
    :param func:
    :param deriv: derivative of func, None skips the Newton polish
    :param lo: func(lo) < 0
    :param hi: func(hi) > 0
    :param rel_width: stop when hi - lo <= rel_width * hi
    :param newton_steps:
    :param max_steps:
    :param until_ratio: stop early once hi / lo <= until_ratio
    :return:
    """
    iterations = 0
    x, fx = None, None
    while hi - lo > rel_width * hi:
        if until_ratio is not None and hi <= until_ratio * lo:
            break
        if iterations >= max_steps:
            raise BracketFailure(f"bisection did not shrink [{lo:.6e}, {hi:.6e}] in {max_steps} steps")
        mid = _split(lo, hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = func(mid)
        iterations += 1
        if f_mid == 0.0:
            return RootResult(root=mid, value=0.0, lo=mid, hi=mid, iterations=iterations)
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
        x, fx = mid, f_mid

    if x is None or not lo <= x <= hi:
        x = _split(lo, hi)
        fx = func(x)
        iterations += 1

    if deriv is not None:
        for _ in range(newton_steps):
            slope = deriv(x)
            if slope <= 0 or not math.isfinite(slope):
                break
            candidate = x - fx / slope
            if not lo <= candidate <= hi:
                break
            f_candidate = func(candidate)
            iterations += 1
            if abs(f_candidate) >= abs(fx):
                break
            x, fx = candidate, f_candidate
            if fx == 0.0:
                break
    return RootResult(root=x, value=fx, lo=lo, hi=hi, iterations=iterations)
