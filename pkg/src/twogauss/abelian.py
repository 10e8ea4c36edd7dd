"""Finitely generated abelian groups with componentwise element arithmetic.

Elements are integer tuples; the first ``len(torsion)`` coordinates are
reduced modulo the torsion orders, the remaining ``rank`` coordinates are
free.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class AbelianGroup:
    """Z^rank plus cyclic factors of the given orders (each >= 2)."""

    rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        if any(n < 2 for n in self.torsion):
            raise ValueError("torsion orders must be >= 2")
        object.__setattr__(self, "torsion", tuple(int(n) for n in self.torsion))

    @property
    def ncoords(self):
        return len(self.torsion) + self.rank

    def zero(self):
        return (0,) * self.ncoords

    def normalize(self, elem):
        elem = tuple(int(x) for x in elem)
        if len(elem) != self.ncoords:
            raise ValueError(f"element has {len(elem)} coordinates, expected {self.ncoords}")
        head = tuple(x % n for x, n in zip(elem, self.torsion))
        return head + elem[len(self.torsion):]

    def add(self, a, b):
        return self.normalize(tuple(x + y for x, y in zip(a, b)))

    def neg(self, a):
        return self.normalize(tuple(-x for x in a))

    def scale(self, k, a):
        return self.normalize(tuple(k * x for x in a))

    def is_zero(self, a):
        return self.normalize(a) == self.zero()

    def sum(self, elems):
        acc = self.zero()
        for e in elems:
            acc = self.add(acc, e)
        return acc


Z2 = AbelianGroup(rank=0, torsion=(2,))
Z = AbelianGroup(rank=1, torsion=())
