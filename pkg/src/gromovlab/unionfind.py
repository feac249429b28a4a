"""Union-find with a sign on every element relative to its root."""

from __future__ import annotations


class ParityConflict(ValueError):
    pass


class ParityUnionFind:
    """Disjoint sets where each element carries a sign ``+1``/``-1`` relative to its root.

    ``union(a, b, s)`` records ``value(b) = s * value(a)``.  Joining two
    elements already in one set with the opposite sign raises
    :class:`ParityConflict`.
    """

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.sign = [1] * n
        self.size = [1] * n

    def __len__(self) -> int:
        return len(self.parent)

    def find(self, x: int) -> tuple[int, int]:
        path = []
        while self.parent[x] != x:
            path.append(x)
            x = self.parent[x]
        root = x
        # compress, accumulating signs from the top of the path down
        acc = 1
        for y in reversed(path):
            acc *= self.sign[y]
            self.sign[y] = acc
            self.parent[y] = root
        return root, (self.sign[path[0]] if path else 1)

    def union(self, a: int, b: int, s: int = 1) -> int:
        ra, sa = self.find(a)
        rb, sb = self.find(b)
        if ra == rb:
            if sa * sb != s:
                raise ParityConflict(f"elements {a} and {b} forced to opposite signs")
            return ra
        # value(rb) = sb*value(b) = sb*s*value(a) = sb*s*sa*value(ra)
        rel = sa * sb * s
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.sign[rb] = rel
        self.size[ra] += self.size[rb]
        return ra

    def groups(self) -> dict[int, list[tuple[int, int]]]:
        """Map root -> [(element, sign relative to root)] in element order."""
        out: dict[int, list[tuple[int, int]]] = {}
        for x in range(len(self.parent)):
            r, s = self.find(x)
            out.setdefault(r, []).append((x, s))
        return out
