from flatmap_distinct_count import vocabulary_stats


def test_counts_distinct_words():
    words, _ = vocabulary_stats(["a rose is a rose", "is it"])
    assert words == 4


def test_counts_characters():
    _, chars = vocabulary_stats(["abc", "de f"])
    assert chars == 7


def test_no_documents():
    assert vocabulary_stats([]) == (0, 0)
