import random

import pytest

from rdd_shim import SparkConf, SparkContext

CASES = 200


@pytest.fixture
def sc():
    ctx = SparkContext.getOrCreate(SparkConf().setAppName("shim-tests").setMaster("local[*]"))
    yield ctx
    ctx.stop()


def ints(r, lo=-20, hi=20, n=12):
    return [r.randint(lo, hi) for _ in range(r.randint(0, n))]


def pairs(r, n=8):
    return [(r.randint(0, 4), r.randint(0, 9)) for _ in range(r.randint(0, n))]


def randomized(seed):
    r = random.Random(seed)
    return (r for _ in range(CASES))


def test_examples(sc):
    assert sc.parallelize([1, 2, 3]).map(lambda x: x + 1).collect() == [2, 3, 4]
    assert sc.parallelize([[1, 2], [3]]).flatMap(lambda x: x).collect() == [1, 2, 3]
    left = sc.parallelize([(1, "a")])
    right = sc.parallelize([(1, "b"), (2, "c")])
    assert left.join(right).collect() == [(1, ("a", "b"))]


def test_map(sc):
    for r in randomized(1):
        xs = ints(r)
        expected = []
        for x in xs:
            expected.append(x * 3 - 1)
        assert sc.parallelize(xs).map(lambda x: x * 3 - 1).collect() == expected


def test_filter(sc):
    for r in randomized(2):
        xs = ints(r)
        m = r.randint(1, 4)
        expected = []
        for x in xs:
            if x % m == 0:
                expected.append(x)
        assert sc.parallelize(xs).filter(lambda x: x % m == 0).collect() == expected


def test_flat_map(sc):
    for r in randomized(3):
        xss = [ints(r, n=4) for _ in range(r.randint(0, 5))]
        expected = []
        for xs in xss:
            for x in xs:
                expected.append(x)
        assert sc.parallelize(xss).flatMap(lambda x: x).collect() == expected


def test_reduce(sc):
    for r in randomized(4):
        xs = ints(r) or [r.randint(-5, 5)]
        acc = xs[0]
        for x in xs[1:]:
            acc = acc * 2 - x
        assert sc.parallelize(xs).reduce(lambda a, b: a * 2 - b) == acc


def test_reduce_empty_raises(sc):
    with pytest.raises(ValueError):
        sc.parallelize([]).reduce(lambda a, b: a + b)


def test_join(sc):
    for r in randomized(5):
        left, right = pairs(r), pairs(r)
        expected = []
        for k, v in left:
            for k2, w in right:
                if k == k2:
                    expected.append((k, (v, w)))
        got = sc.parallelize(left).join(sc.parallelize(right)).collect()
        assert sorted(got) == sorted(expected)


def test_join_rejects_non_pairs(sc):
    with pytest.raises(TypeError):
        sc.parallelize([1, 2]).join(sc.parallelize([(1, 2)])).collect()


def test_union(sc):
    for r in randomized(6):
        a, b = ints(r), ints(r)
        expected = list(a)
        for x in b:
            expected.append(x)
        assert sc.parallelize(a).union(sc.parallelize(b)).collect() == expected


def test_sort_by(sc):
    for r in randomized(7):
        xs = pairs(r)
        ascending = r.random() < 0.5
        # Insertion sort on the key keeps equal keys in input order.
        expected = []
        for x in xs:
            i = len(expected)
            while i > 0 and (expected[i - 1][0] > x[0] if ascending else expected[i - 1][0] < x[0]):
                i -= 1
            expected.insert(i, x)
        got = sc.parallelize(xs).sortBy(lambda p: p[0], ascending=ascending).collect()
        assert got == expected


def test_group_by_key(sc):
    for r in randomized(8):
        xs = pairs(r)
        expected = {}
        for k, v in xs:
            if k not in expected:
                expected[k] = []
            expected[k].append(v)
        got = sc.parallelize(xs).groupByKey().collect()
        assert sorted((k, list(v)) for k, v in got) == sorted(expected.items())


def test_distinct(sc):
    for r in randomized(9):
        xs = ints(r, -3, 3)
        expected = []
        for x in xs:
            if x not in expected:
                expected.append(x)
        assert sc.parallelize(xs).distinct().collect() == expected


def test_count_sum_take(sc):
    for r in randomized(10):
        xs = ints(r)
        n = r.randint(0, 15)
        total = 0
        for x in xs:
            total += x
        rdd = sc.parallelize(xs)
        assert rdd.count() == len(xs)
        assert rdd.sum() == total
        assert rdd.take(n) == [xs[i] for i in range(min(n, len(xs)))]


def test_transformations_leave_source_unchanged(sc):
    for r in randomized(11):
        xs = ints(r)
        rdd = sc.parallelize(xs)
        rdd.map(lambda x: -x)
        rdd.filter(lambda x: x > 0)
        rdd.distinct()
        rdd.sortBy(lambda x: x)
        rdd.union(rdd)
        assert rdd.collect() == xs


def test_get_or_create_reuses_live_context():
    first = SparkContext.getOrCreate(SparkConf().setAppName("a"))
    assert SparkContext.getOrCreate() is first
    first.stop()
    second = SparkContext.getOrCreate(SparkConf().setAppName("b"))
    assert second is not first
    assert second.appName == "b"
    second.stop()


def test_stopped_context_rejects_work():
    ctx = SparkContext.getOrCreate()
    rdd = ctx.parallelize([1])
    ctx.stop()
    with pytest.raises(RuntimeError):
        rdd.collect()
