from __future__ import annotations

import dataclasses
from typing import Callable, Dict, List, Union

import numpy as np

from hierassoclib.helpers import DomainError, _unknown_name_error, _normalize_name


def _nonnegative_min_times(x, y):
    # 0 * inf is taken as inf, so +inf stays absorbing over the nonnegative reals.
    with np.errstate(invalid="ignore"):
        product = np.multiply(x, y)
    product = np.where(np.isposinf(x) | np.isposinf(y), np.inf, product)
    if np.ndim(product) == 0:
        return np.float64(product)
    return product


@dataclasses.dataclass(frozen=True, eq=False)
class Semiring:
    """
    A value algebra (V, plus, times, zero, one) used by every array operation.

    Semirings are immutable, so they can be shared freely between threads and processes.
    Get them with builtin_semiring rather than building them by hand.

    Attributes:
        name (str): The identifier, such as "plus_times" or "max_plus".
        plus (numpy.ufunc): The addition. Always a numpy ufunc, so it can be used with reduceat.
        times (Callable): The multiplication, applied elementwise to scalars or arrays.
        zero (float): Additive identity and multiplicative annihilator. Never stored in an array.
        one (float): Multiplicative identity.
        nonnegative (bool): Whether the value domain is restricted to values >= 0.
    """
    name: str
    plus: np.ufunc
    times: Callable
    zero: float
    one: float
    nonnegative: bool = False

    def __eq__(self, other):
        if not isinstance(other, Semiring):
            return NotImplemented
        return self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __reduce__(self):
        #Unpickles to the shared builtin instance.
        return builtin_semiring, (self.name,)

    def __repr__(self):
        return f"Semiring({self.name})"

    @staticmethod
    def names() -> List[str]:
        """
        Returns:
            list[str]: The names accepted by builtin_semiring.
        """
        return list(_builtin_semirings.keys())

    def plus_reduce(self, values:np.ndarray, starts:np.ndarray) -> np.ndarray:
        """
        Folds each segment of values with plus, left to right.

        Parameters:
            values (numpy.ndarray): The values to reduce.
            starts (numpy.ndarray): The index at which each segment begins (sorted, first one is 0).
        """
        return self.plus.reduceat(values, starts)

    def validate(self, values:Union[np.ndarray, float, list], allow_identity:bool = False) -> np.ndarray:
        """
        Checks that values can be stored under this semiring and converts them to float64.

        An infinite zero is always accepted (it is dropped on assembly). An infinite one is only accepted
        with allow_identity, for identity arrays built by the library and for reading them back.

        Parameters:
            values: The values to check.
            allow_identity (bool, optional): Accept the semiring's one even when it is infinite.

        Raises:
            DomainError: For non-numeric values, NaN, disallowed infinities, or negatives under a nonnegative semiring.
        """
        try:
            values = np.asarray(values, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise DomainError(f"Values must be numeric: {e}")
        if values.size == 0:
            return values
        if np.isnan(values).any():
            raise DomainError("NaN is not a valid value.")
        infinite = np.isinf(values)
        if infinite.any():
            candidates = (self.zero, self.one) if allow_identity else (self.zero,)
            allowed = [x for x in candidates if np.isinf(x)]
            stray = infinite & ~np.isin(values, allowed)
            if stray.any():
                raise DomainError(f"Infinite values can't be stored under {self.name} (found {values[stray][0]}).")
        if self.nonnegative and (values < 0).any():
            raise DomainError(f"The {self.name} semiring only accepts nonnegative values (found {values[values < 0][0]}).")
        return values


_builtin_semirings: Dict[str, Semiring] = {
    "plus_times": Semiring("plus_times", np.add, np.multiply, 0.0, 1.0),
    "max_plus": Semiring("max_plus", np.maximum, np.add, -np.inf, 0.0),
    "min_plus": Semiring("min_plus", np.minimum, np.add, np.inf, 0.0),
    "max_times": Semiring("max_times", np.maximum, np.multiply, 0.0, 1.0, nonnegative=True),
    "min_times": Semiring("min_times", np.minimum, _nonnegative_min_times, np.inf, 1.0, nonnegative=True),
    "max_min": Semiring("max_min", np.maximum, np.minimum, -np.inf, np.inf),
    "min_max": Semiring("min_max", np.minimum, np.maximum, np.inf, -np.inf),
}


def builtin_semiring(name:Union[str, Semiring]) -> Semiring:
    """
    Looks up one of the builtin semirings.

    Parameters:
        name (str|Semiring): plus_times, max_plus, min_plus, max_times, min_times, max_min or min_max. A Semiring is returned as-is.

    Returns:
        Semiring: The named semiring.

    Raises:
        ConfigurationError: If the name is unknown. The message lists the valid names.
    """
    if isinstance(name, Semiring):
        return name
    key = _normalize_name(name).replace("-", "_").replace(".", "_")
    try:
        return _builtin_semirings[key]
    except KeyError:
        raise _unknown_name_error("semiring", str(name), list(_builtin_semirings.keys()))
