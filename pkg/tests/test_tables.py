import pytest

from prefetchlab.tables import DirectMappedTable, SetAssociativeTable


def test_lru_eviction_within_set():
    # single set of 2 ways: a, b, c evicts a
    t = SetAssociativeTable(entries=2, ways=2)
    assert t.insert("a", 1) is None
    assert t.insert("b", 2) is None
    assert t.insert("c", 3) == ("a", 1)


def test_lookup_refreshes_lru():
    t = SetAssociativeTable(entries=2, ways=2)
    t.insert("a", 1)
    t.insert("b", 2)
    t.lookup("a")
    assert t.insert("c", 3) == ("b", 2)


def test_update_existing_key_keeps_size():
    t = SetAssociativeTable(entries=4, ways=4)
    t.insert(1, "x")
    t.insert(1, "y")
    assert len(t) == 1
    assert t.lookup(1) == "y"


def test_bad_geometry_rejected():
    with pytest.raises(ValueError):
        SetAssociativeTable(entries=10, ways=4)
    with pytest.raises(ValueError):
        SetAssociativeTable(entries=0, ways=1)


def test_direct_mapped_validates_key():
    t = DirectMappedTable(entries=8)
    t.put((1, 2), "v")
    assert t.get((1, 2)) == "v"
    # a colliding key must not alias
    for other in range(100):
        if other != 1 and t.get((other, 2)) is not None:
            raise AssertionError("aliased read")
