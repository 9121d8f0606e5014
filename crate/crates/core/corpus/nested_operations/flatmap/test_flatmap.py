from flatmap import flatten


def test_flattens_in_order():
    assert flatten([[1, 2], [3], [4, 5, 6]]) == [1, 2, 3, 4, 5, 6]


def test_empty_sublists():
    assert flatten([[], [1], []]) == [1]


def test_no_lists():
    assert flatten([]) == []
