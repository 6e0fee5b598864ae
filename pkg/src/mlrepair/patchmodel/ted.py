"""Ordered tree edit distance (Zhang and Shasha) with unit costs.

Trees are ``(label, children)`` pairs where ``children`` is a tuple of trees.
"""

from __future__ import annotations


def tree_size(t) -> int:
    return 1 + sum(tree_size(c) for c in t[1])


def _postorder(t):
    labels: list = []
    lmd: list[int] = []  # leftmost leaf descendant, postorder index

    def walk(node) -> int:
        first = None
        for c in node[1]:
            leaf = walk(c)
            if first is None:
                first = leaf
        labels.append(node[0])
        idx = len(labels) - 1
        lmd.append(idx if first is None else first)
        return lmd[idx]

    walk(t)
    return labels, lmd


def _keyroots(lmd: list[int]) -> list[int]:
    seen = {}
    for i, l in enumerate(lmd):
        seen[l] = i
    return sorted(seen.values())


def tree_edit_distance(a, b) -> int:
    la, ra = _postorder(a)
    lb, rb = _postorder(b)
    n, m = len(la), len(lb)
    td = [[0] * m for _ in range(n)]
    for i in _keyroots(ra):
        for j in _keyroots(rb):
            ioff, joff = ra[i] - 1, rb[j] - 1
            rows, cols = i - ioff + 1, j - joff + 1
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + 1
            for y in range(1, cols):
                fd[0][y] = fd[0][y - 1] + 1
            for x in range(1, rows):
                for y in range(1, cols):
                    i1, j1 = x + ioff, y + joff
                    if ra[i1] == ra[i] and rb[j1] == rb[j]:
                        cost = 0 if la[i1] == lb[j1] else 1
                        fd[x][y] = min(fd[x - 1][y] + 1, fd[x][y - 1] + 1, fd[x - 1][y - 1] + cost)
                        td[i1][j1] = fd[x][y]
                    else:
                        px, py = ra[i1] - 1 - ioff, rb[j1] - 1 - joff
                        fd[x][y] = min(fd[x - 1][y] + 1, fd[x][y - 1] + 1, fd[px][py] + td[i1][j1])
    return td[n - 1][m - 1]


def normalized_distance(a, b) -> float:
    """Edit distance divided by the larger tree size, capped at 1.

    Shape mismatches can push the raw ratio above 1 (a chain against a
    star of the same size); such pairs are simply maximally distant.
    """
    return min(1.0, tree_edit_distance(a, b) / max(tree_size(a), tree_size(b)))
