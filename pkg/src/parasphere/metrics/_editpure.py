"""Pure-Python edit-distance kernels; exact twin of the compiled extension.

Both backends take interned int64 id arrays and must return identical
integers: the distances are model-defined, the backend only changes speed.
"""

import numpy as np


def levenshtein(a, b) -> int:
    """Unit-cost edit distance between two id sequences (two-row DP)."""
    a = np.asarray(a, dtype=np.int64).tolist()
    b = np.asarray(b, dtype=np.int64).tolist()
    la, lb = len(a), len(b)
    prev = list(range(lb + 1))
    cur = [0] * (lb + 1)
    for i in range(1, la + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ai == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev, cur = cur, prev
    return int(prev[lb])


def ted_kernel(labels1, lmld1, kr1, labels2, lmld2, kr2) -> int:
    """Ordered tree edit distance, unit costs (classic keyroot DP).

    Arrays are 1-indexed (slot 0 unused): labels[i] is the interned label of
    the i-th node in postorder, lmld[i] its leftmost leaf descendant, kr the
    ascending keyroot indices.
    """
    labels1 = np.asarray(labels1, dtype=np.int64).tolist()
    lmld1 = np.asarray(lmld1, dtype=np.int64).tolist()
    kr1 = np.asarray(kr1, dtype=np.int64).tolist()
    labels2 = np.asarray(labels2, dtype=np.int64).tolist()
    lmld2 = np.asarray(lmld2, dtype=np.int64).tolist()
    kr2 = np.asarray(kr2, dtype=np.int64).tolist()
    n1 = len(labels1) - 1
    n2 = len(labels2) - 1
    td = [[0] * (n2 + 1) for _ in range(n1 + 1)]

    for i in kr1:
        li = lmld1[i]
        for j in kr2:
            lj = lmld2[j]
            m = i - li + 2
            n = j - lj + 2
            fd = [[0] * n for _ in range(m)]
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + 1
            for y in range(1, n):
                fd[0][y] = fd[0][y - 1] + 1
            for x in range(1, m):
                xi = x + li - 1
                for y in range(1, n):
                    yj = y + lj - 1
                    if lmld1[xi] == li and lmld2[yj] == lj:
                        cost = 0 if labels1[xi] == labels2[yj] else 1
                        fd[x][y] = min(fd[x - 1][y] + 1,
                                       fd[x][y - 1] + 1,
                                       fd[x - 1][y - 1] + cost)
                        td[xi][yj] = fd[x][y]
                    else:
                        fd[x][y] = min(fd[x - 1][y] + 1,
                                       fd[x][y - 1] + 1,
                                       fd[lmld1[xi] - li][lmld2[yj] - lj] + td[xi][yj])
    return td[n1][n2]
