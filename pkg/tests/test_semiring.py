import itertools
import math
import pickle

import numpy as np
import pytest

from hierassoclib import Semiring, builtin_semiring, ConfigurationError, DomainError

from conftest import semiring_names


def test_names():
    assert Semiring.names() == ["plus_times", "max_plus", "min_plus", "max_times", "min_times", "max_min", "min_max"]


@pytest.mark.parametrize("name, plus, times", [
    ("plus_times", 5, 6),
    ("max_plus", 3, 5),
    ("min_plus", 2, 5),
    ("max_times", 3, 6),
    ("min_times", 2, 6),
    ("max_min", 3, 2),
    ("min_max", 2, 3),
])
def test_operations_on_two_and_three(name, plus, times):
    s = builtin_semiring(name)
    assert s.plus(2.0, 3.0) == plus
    assert s.times(2.0, 3.0) == times


@pytest.mark.parametrize("name, zero, one", [
    ("plus_times", 0, 1),
    ("max_plus", -math.inf, 0),
    ("min_plus", math.inf, 0),
    ("max_times", 0, 1),
    ("min_times", math.inf, 1),
    ("max_min", -math.inf, math.inf),
    ("min_max", math.inf, -math.inf),
])
def test_identities(name, zero, one):
    s = builtin_semiring(name)
    assert s.zero == zero
    assert s.one == one


def test_name_normalization():
    assert builtin_semiring("Max-Plus") is builtin_semiring("max_plus")
    assert builtin_semiring(" min.times ") is builtin_semiring("min_times")
    s = builtin_semiring("plus_times")
    assert builtin_semiring(s) is s


def test_unknown_name_lists_valid_set():
    with pytest.raises(ConfigurationError) as info:
        builtin_semiring("max_plsu")
    message = str(info.value)
    for name in Semiring.names():
        assert name in message
    assert "Did you mean 'max_plus'" in message


def test_unknown_name_is_value_error():
    with pytest.raises(ValueError):
        builtin_semiring("union_intersection")


def _value_grid(s):
    return [float(x) for x in (range(0, 11) if s.nonnegative else range(-10, 11))]


@pytest.mark.parametrize("name", semiring_names)
def test_laws_on_value_grid(name):
    s = builtin_semiring(name)
    grid = _value_grid(s)
    for a, b in itertools.product(grid, repeat=2):
        assert s.plus(a, b) == s.plus(b, a)
    for a, b, c in itertools.product(grid[::2], repeat=3):
        assert s.plus(s.plus(a, b), c) == s.plus(a, s.plus(b, c))
        assert s.times(s.times(a, b), c) == s.times(a, s.times(b, c))
        assert s.times(a, s.plus(b, c)) == s.plus(s.times(a, b), s.times(a, c))


@pytest.mark.parametrize("name", semiring_names)
def test_identity_and_annihilator_on_random_values(name, rng):
    s = builtin_semiring(name)
    values = rng.uniform(0 if s.nonnegative else -1000, 1000, size=1000)
    assert np.array_equal(s.plus(values, s.zero), values)
    assert np.array_equal(s.times(values, s.one), values)
    assert np.all(s.times(values, s.zero) == s.zero)
    assert np.all(s.times(s.zero, values) == s.zero)


def test_plus_times_distributivity_on_floats(rng):
    s = builtin_semiring("plus_times")
    a, b, c = rng.uniform(-1, 1, size=(3, 1000))
    left = s.times(a, s.plus(b, c))
    right = s.plus(s.times(a, b), s.times(a, c))
    assert np.allclose(left, right, rtol=1e-12, atol=1e-15)


def test_min_times_zero_annihilates_stored_zero():
    s = builtin_semiring("min_times")
    assert s.times(0.0, math.inf) == math.inf
    assert s.times(math.inf, 0.0) == math.inf
    assert np.array_equal(s.times(np.array([0.0, 2.0]), np.array([3.0, 0.0])), [0.0, 0.0])


def test_plus_reduce_segments():
    s = builtin_semiring("max_plus")
    assert s.plus_reduce(np.array([1.0, 5.0, 2.0, -1.0, 7.0]), np.array([0, 2, 3])).tolist() == [5.0, 2.0, 7.0]


class TestValidate:
    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            builtin_semiring("plus_times").validate([1.0, float("nan")])

    def test_stray_infinity_rejected(self):
        with pytest.raises(DomainError):
            builtin_semiring("plus_times").validate([math.inf])
        with pytest.raises(DomainError):
            builtin_semiring("max_plus").validate([math.inf])

    def test_infinite_zero_allowed(self):
        assert builtin_semiring("max_min").validate([-math.inf, 1.0]).tolist() == [-math.inf, 1.0]
        assert builtin_semiring("max_plus").validate([-math.inf]).tolist() == [-math.inf]

    def test_infinite_one_needs_allow_identity(self):
        s = builtin_semiring("max_min")
        with pytest.raises(DomainError):
            s.validate([math.inf, 1.0])
        assert s.validate([math.inf, -math.inf], allow_identity=True).tolist() == [math.inf, -math.inf]
        with pytest.raises(DomainError):
            builtin_semiring("max_plus").validate([math.inf], allow_identity=True)

    def test_negative_rejected_under_nonnegative_semirings(self):
        for name in ("max_times", "min_times"):
            with pytest.raises(DomainError):
                builtin_semiring(name).validate([1.0, -2.0])
        assert builtin_semiring("plus_times").validate([-2.0]).tolist() == [-2.0]

    def test_non_numeric_rejected(self):
        with pytest.raises(DomainError):
            builtin_semiring("plus_times").validate(["abc"])


def test_pickles_to_shared_instance():
    for name in semiring_names:
        s = builtin_semiring(name)
        assert pickle.loads(pickle.dumps(s)) is s
