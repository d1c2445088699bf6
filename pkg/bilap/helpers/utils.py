import logging
import math
from typing import Iterable, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "{:.17g}"


class Utils:
    """
    Class, containing small numeric helpers shared by the modules
    """

    @classmethod
    def pairwise_sum(cls, values: np.ndarray) -> np.ndarray:
        """
        Sums along the first axis with a fixed binary tree.
        The tree depends only on the length of the input, so the result is
        reproducible bit for bit whatever produced the partial sums
        :param values: array of shape (n, ...)
        :return: array of shape (...)
        """
        values = np.asarray(values, dtype=float)
        if values.shape[0] == 0:
            return np.zeros(values.shape[1:])
        while values.shape[0] > 1:
            if values.shape[0] % 2:
                pad = np.zeros((1,) + values.shape[1:])
                values = np.concatenate([values, pad], axis=0)
            values = values[0::2] + values[1::2]
        return values[0]

    @classmethod
    def geometric_ladder(cls, start: float, ratio: float, count: int) -> List[float]:
        """
        start, start*ratio, ..., start*ratio**(count-1)
        :param start:
        :param ratio:
        :param count:
        :return:
        """
        return [start * ratio ** j for j in range(count)]

    @classmethod
    def next_power_of_two(cls, value: float, minimum: int = 8) -> int:
        n = minimum
        while n < value:
            n *= 2
        return n

    @classmethod
    def relative_diff(cls, a: float, b: float) -> float:
        scale = max(abs(a), abs(b))
        if scale == 0.0:
            return 0.0
        return abs(a - b) / scale

    @classmethod
    def format_float(cls, value: Optional[float]) -> str:
        """
        Text form used in CSV tables: 17 significant digits, inf/nan spelled out
        :param value:
        :return:
        """
        if value is None:
            return ""
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return CSV_FLOAT_FORMAT.format(value)

    @classmethod
    def sign_changes(cls, values: Sequence[float]) -> int:
        signs = [v > 0 for v in values if v != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def jsonable(value):
    """
    Converts numpy scalars, tuples and non-finite floats to what the JSON writer accepts.
    +inf is written as the string "inf"
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def strictly_monotone(values: Iterable[float], decreasing: bool = True) -> bool:
    values = list(values)
    pairs = zip(values, values[1:])
    if decreasing:
        return all(b < a for a, b in pairs)
    return all(b > a for a, b in pairs)


def str_or_bool(value):
    if value in ["true", "True", "1", "yes", True, 1]:
        value = True
    elif value in ["false", "False", "0", "no", False, 0]:
        value = False
    return value
