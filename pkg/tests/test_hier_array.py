import numpy as np
import pytest

from hierassoclib import AssocArray, HierArray, CutSpec, ConfigurationError, AlgebraError

from conftest import key_pool


def batch_of(pairs, value=1.0, semiring="plus_times"):
    return AssocArray.from_triples([r for r, _ in pairs], [c for _, c in pairs], value, semiring)


three = batch_of([("a", "x"), ("b", "y"), ("c", "z")])
two = batch_of([("a", "x"), ("b", "y")])


class TestCutSpec:
    def test_no_cuts(self):
        H = HierArray([])
        assert H.num_layers == 1
        assert H.layers[0].nnz == 0

    def test_two_cuts(self):
        assert HierArray([1000, 100000]).num_layers == 3

    def test_decreasing_rejected(self):
        with pytest.raises(ConfigurationError):
            HierArray([100000, 1000])
        with pytest.raises(ConfigurationError):
            CutSpec((5, 5))

    def test_nonpositive_rejected(self):
        with pytest.raises(ConfigurationError):
            CutSpec((0, 10))

    def test_parse(self):
        assert CutSpec.parse("8192,262144,8388608").cuts == (8192, 262144, 8388608)
        assert CutSpec.parse("").cuts == ()
        assert CutSpec.parse("0").cuts == ()
        with pytest.raises(ConfigurationError):
            CutSpec.parse("10,abc")

    def test_presets(self):
        assert CutSpec.preset("none").cuts == ()
        assert CutSpec.preset("few-wide").cuts == (2 ** 17, 2 ** 23)
        assert CutSpec.preset("many-narrow").cuts == (2 ** 13, 2 ** 16, 2 ** 19, 2 ** 22)
        with pytest.raises(ConfigurationError) as info:
            CutSpec.preset("many-narow")
        assert "many-narrow" in str(info.value)

    def test_geometric(self):
        assert CutSpec.geometric(1).cuts == ()
        assert CutSpec.geometric(3).cuts == (2 ** 13, 2 ** 18)
        assert CutSpec.geometric(4, first_cut=10, ratio=4).cuts == (10, 40, 160)
        with pytest.raises(ConfigurationError):
            CutSpec.geometric(0)

    def test_resolve(self):
        assert CutSpec.resolve(None).cuts == ()
        assert CutSpec.resolve("few-wide") == CutSpec.preset("few-wide")
        assert CutSpec.resolve("3,9").cuts == (3, 9)
        assert CutSpec.resolve([3, 9]).cuts == (3, 9)
        assert CutSpec.resolve(CutSpec((4,))).to_text() == "4"


class TestUpdateTraces:
    def test_cascade_on_overflow(self):
        H = HierArray([2]).update(three)
        assert H.layers[0].nnz == 0
        assert H.layers[1].nnz == 3
        assert H.stats.cascades == [1, 0]
        assert H.layer_nnz() == (0, 3, 3)

    def test_strict_inequality(self):
        H = HierArray([2]).update(two)
        assert H.layers[0].nnz == 2
        assert H.layers[1].nnz == 0
        assert H.stats.cascades == [0, 0]

    def test_cascade_propagates_in_one_pass(self):
        H = HierArray([1, 2]).update(three)
        assert [layer.nnz for layer in H.layers] == [0, 0, 3]
        assert H.stats.cascades == [1, 1, 0]
        assert H.stats.absorbed == [3, 3, 3]

    def test_flush_after_cascade(self):
        H = HierArray([2]).update(three)
        assert H.flush() == three

    def test_overlapping_layers(self):
        H = HierArray([]).update(batch_of([("a", "x")])).update(batch_of([("a", "x")]))
        assert H.layer_nnz() == (1, 1)
        assert H.flush().to_dict() == {("a", "x"): 2.0}

    def test_flushed_total_below_layer_sum(self):
        H = HierArray([1]).update(two).update(batch_of([("a", "x")]))
        assert H.layer_nnz() == (1, 2, 2)

    def test_empty(self):
        H = HierArray([4, 16])
        assert H.flush().nnz == 0
        assert H.layer_nnz() == (0, 0, 0, 0)

    def test_flush_is_a_read(self):
        H = HierArray([2]).update(two)
        before = H.layers
        H.flush()
        assert H.layers == before

    def test_compact(self):
        H = HierArray([1, 5]).update(two).update(batch_of([("q", "r")]))
        flushed = H.flush()
        H.compact()
        assert [layer.nnz for layer in H.layers[:-1]] == [0, 0]
        assert H.layers[-1] == flushed

    def test_semiring_mismatch(self):
        with pytest.raises(AlgebraError):
            HierArray([2]).update(batch_of([("a", "x")], semiring="max_plus"))

    def test_cleared_layer_has_no_keys(self):
        H = HierArray([2]).update(three)
        assert H.layers[0].shape == (0, 0)

    def test_extract_without_flush(self):
        H = HierArray([1]).update(two).update(batch_of([("a", "x"), ("a", "w")]))
        assert H.extract(["a"], None) == H.flush().extract(["a"], None)
        assert H.extract(["a"], None).to_dict() == {("a", "w"): 1.0, ("a", "x"): 2.0}


def random_stream(rng, max_batches=30, max_batch=200, keys=60):
    pool = key_pool(keys)
    batches = []
    for _ in range(int(rng.integers(1, max_batches + 1))):
        n = int(rng.integers(0, max_batch + 1))
        rows = [pool[i] for i in rng.integers(0, keys, n)]
        cols = [pool[i] for i in rng.integers(0, keys, n)]
        vals = rng.integers(-3, 4, n).astype(np.float64)
        batches.append(AssocArray.from_triples(rows, cols, vals))
    return batches


def random_cuts(rng):
    count = int(rng.integers(0, 5))
    return CutSpec(tuple(sorted(set(int(x) for x in rng.integers(1, 2000, count)))))


def flat_fold(batches):
    total = AssocArray.empty()
    for batch in batches:
        total = total + batch
    return total


def test_flush_equals_flat_fold(rng):
    for _ in range(100):
        batches = random_stream(rng)
        cuts = random_cuts(rng)
        H = HierArray(cuts)
        for batch in batches:
            H.update(batch)
            for layer, cut in zip(H.layers, cuts):
                assert layer.nnz <= cut
        assert H.flush() == flat_fold(batches)
        assert H.stats.updates == len(batches)


def test_cut_spec_independence(rng):
    batches = random_stream(rng, max_batches=40)
    flushes = []
    for cuts in ([], [5], [10, 100], [1, 2, 3, 4], "few-wide"):
        H = HierArray(cuts)
        for batch in batches:
            H.update(batch)
        flushes.append(H.flush())
    assert all(flush == flushes[0] for flush in flushes)


def test_determinism(rng):
    batches = random_stream(rng)
    states = []
    for _ in range(2):
        H = HierArray([7, 70])
        for batch in batches:
            H.update(batch)
        states.append((H.layers, H.stats))
    assert states[0][0] == states[1][0]
    assert states[0][1] == states[1][1]


@pytest.mark.parametrize("name", ["max_plus", "min_max", "min_times"])
def test_flush_equals_flat_fold_other_semirings(name, rng):
    pool = key_pool(30)
    batches = []
    for _ in range(20):
        n = int(rng.integers(1, 50))
        batches.append(AssocArray.from_triples([pool[i] for i in rng.integers(0, 30, n)], [pool[i] for i in rng.integers(0, 30, n)],
                                               rng.integers(0, 9, n).astype(np.float64), name))
    H = HierArray([8, 40], name)
    total = AssocArray.empty(name)
    for batch in batches:
        H.update(batch)
        total = total + batch
    assert H.flush() == total
