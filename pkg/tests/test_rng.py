"""Determinism and distribution sanity for the seeded generator."""

from efg2ludii import SplitMix64


def test_same_seed_same_stream():
    a = SplitMix64(12345)
    b = SplitMix64(12345)
    assert [a.next_uint64() for _ in range(50)] == [b.next_uint64() for _ in range(50)]


def test_known_values_are_stable():
    # Frozen outputs of the reference SplitMix64 stream for seed 0; these
    # pin the algorithm so a refactor cannot silently change playouts.
    rng = SplitMix64(0)
    assert rng.next_uint64() == 0xE220A8397B1DCDAF
    assert rng.next_uint64() == 0x6E789E6AA1B965F4
    assert rng.next_uint64() == 0x06C45D188009454F


def test_below_stays_in_range():
    rng = SplitMix64(7)
    for bound in (1, 2, 3, 10, 1000):
        for _ in range(200):
            assert 0 <= rng.below(bound) < bound


def test_weighted_prefers_heavier_entries():
    rng = SplitMix64(99)
    counts = [0, 0]
    for _ in range(4000):
        counts[rng.weighted([1, 3])] += 1
    assert counts[1] > counts[0] * 2


def test_split_streams_are_independent_and_deterministic():
    parent_a = SplitMix64(5)
    parent_b = SplitMix64(5)
    child_a = parent_a.split()
    child_b = parent_b.split()
    assert [child_a.next_uint64() for _ in range(10)] == [
        child_b.next_uint64() for _ in range(10)
    ]


def test_shuffle_is_seed_deterministic():
    items_a = list(range(20))
    items_b = list(range(20))
    SplitMix64(3).shuffle(items_a)
    SplitMix64(3).shuffle(items_b)
    assert items_a == items_b
    assert sorted(items_a) == list(range(20))
