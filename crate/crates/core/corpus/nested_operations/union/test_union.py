from union import merge


def test_keeps_all_items():
    assert sorted(merge([3, 1], [2, 1])) == [1, 1, 2, 3]


def test_one_side_empty():
    assert sorted(merge([], [5, 4])) == [4, 5]
    assert sorted(merge([5, 4], [])) == [4, 5]


def test_both_empty():
    assert merge([], []) == []
