from flatmap_count import count_words


def test_counts_words_across_sentences():
    assert count_words(["the quick fox", "jumps over"]) == 5


def test_blank_sentences():
    assert count_words(["", "   ", "one"]) == 1


def test_no_sentences():
    assert count_words([]) == 0
