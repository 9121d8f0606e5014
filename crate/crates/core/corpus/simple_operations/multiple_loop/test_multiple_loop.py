import pytest

from multiple_loop import summarize


def test_discounts_every_price():
    discounted, _ = summarize([50, 150, 200])
    assert discounted == pytest.approx([45.0, 135.0, 180.0])


def test_counts_expensive_items():
    _, expensive = summarize([50, 150, 200, 100])
    assert expensive == 2


def test_empty():
    assert summarize([]) == ([], 0)
