from map_distinct_sort import normalize_tags


def test_normalizes_and_deduplicates():
    unique, _ = normalize_tags([" Spark", "rdd ", "SPARK", "  "])
    assert unique == ["rdd", "spark"]


def test_lengths_follow_sorted_tags():
    _, lengths = normalize_tags(["ccc", "A", "bb"])
    assert lengths == [1, 2, 3]


def test_no_tags():
    assert normalize_tags([]) == ([], [])
