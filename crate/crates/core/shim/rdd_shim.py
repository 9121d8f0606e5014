"""Single-process stand-in for the subset of the RDD API used by generated programs.

Elements keep their input order, so results are deterministic.
"""

import functools
import operator

__all__ = ["SparkConf", "SparkContext", "RDD"]


class SparkConf:
    def __init__(self):
        self._settings = {}

    def set(self, key, value):
        self._settings[key] = value
        return self

    def setAppName(self, name):
        return self.set("spark.app.name", name)

    def setMaster(self, master):
        return self.set("spark.master", master)

    def get(self, key, default=None):
        return self._settings.get(key, default)


class SparkContext:
    _active = None

    def __init__(self, master=None, appName=None, conf=None):
        conf = conf or SparkConf()
        self.appName = appName or conf.get("spark.app.name", "app")
        self.master = master or conf.get("spark.master", "local")
        self.alive = True

    @classmethod
    def getOrCreate(cls, conf=None):
        if cls._active is None or not cls._active.alive:
            cls._active = cls(conf=conf)
        return cls._active

    def parallelize(self, data, numSlices=None):
        self._check()
        return RDD(list(data), self)

    def stop(self):
        self.alive = False
        if SparkContext._active is self:
            SparkContext._active = None

    def _check(self):
        if not self.alive:
            raise RuntimeError("SparkContext was shut down")


def _pair(x):
    if not isinstance(x, (tuple, list)) or len(x) != 2:
        raise TypeError("expected a key-value pair, got %r" % (x,))
    return x[0], x[1]


class RDD:
    def __init__(self, elements, ctx):
        self._elements = elements
        self._ctx = ctx

    def _new(self, elements):
        self._ctx._check()
        return RDD(elements, self._ctx)

    def _items(self):
        self._ctx._check()
        return self._elements

    def map(self, f):
        return self._new([f(x) for x in self._items()])

    def filter(self, f):
        return self._new([x for x in self._items() if f(x)])

    def flatMap(self, f):
        return self._new([y for x in self._items() for y in f(x)])

    def distinct(self, numPartitions=None):
        seen = set()
        out = []
        for x in self._items():
            if x not in seen:
                seen.add(x)
                out.append(x)
        return self._new(out)

    def sortBy(self, keyfunc, ascending=True, numPartitions=None):
        return self._new(sorted(self._items(), key=keyfunc, reverse=not ascending))

    def groupByKey(self, numPartitions=None):
        groups = {}
        for x in self._items():
            k, v = _pair(x)
            groups.setdefault(k, []).append(v)
        return self._new(list(groups.items()))

    def join(self, other, numPartitions=None):
        right = [_pair(y) for y in other._items()]
        out = []
        for x in self._items():
            k, v = _pair(x)
            out.extend((k, (v, w)) for rk, w in right if rk == k)
        return self._new(out)

    def union(self, other):
        return self._new(self._items() + other._items())

    def reduce(self, f):
        items = self._items()
        if not items:
            raise ValueError("Can not reduce() empty RDD")
        return functools.reduce(f, items)

    def sum(self):
        return functools.reduce(operator.add, self._items(), 0)

    def count(self):
        return len(self._items())

    def collect(self):
        return list(self._items())

    def take(self, num):
        return list(self._items()[:num])
