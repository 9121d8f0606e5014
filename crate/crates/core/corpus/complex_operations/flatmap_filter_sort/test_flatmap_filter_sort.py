from flatmap_filter_sort import sorted_positive


def test_keeps_sorted_positive_values():
    positives, _ = sorted_positive([[3, -1], [0, 2], [5, 1]])
    assert positives == [1, 2, 3, 5]


def test_squares_follow_sorted_order():
    _, squares = sorted_positive([[3, -1], [2]])
    assert squares == [4, 9]


def test_no_positive_values():
    assert sorted_positive([[-1, 0], []]) == ([], [])
