from filter_reduce import sum_even


def test_sums_even_numbers():
    assert sum_even([1, 2, 3, 4, 5, 6]) == 12


def test_negative_evens():
    assert sum_even([-4, 3, 2]) == -2


def test_no_even_numbers():
    assert sum_even([1, 3, 5]) == 0
