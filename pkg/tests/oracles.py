"""Independent reference implementations used to freeze expected metric values.

Written from the metric definitions, not from the package code: memoized
recursive edit distance, exhaustive edit-mapping enumeration for tree
distance, set enumeration for IoU.  Trees here are plain (label, children)
tuples so the oracle shares no types with the implementation.
"""

from functools import lru_cache


def lev_oracle(a, b):
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1,
                   d(i, j - 1) + 1,
                   d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def iou_oracle(a, b):
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 100.0
    return 100.0 * len(sa & sb) / len(sa | sb)


def _flatten(t):
    """Postorder labels plus per-node ancestor index sets."""
    labels, parents = [], []

    def walk(node):
        child_idx = [walk(c) for c in node[1]]
        idx = len(labels)
        labels.append(node[0])
        parents.append(None)
        for c in child_idx:
            parents[c] = idx
        return idx

    walk(t)
    ancestors = []
    for i in range(len(labels)):
        seen, p = set(), parents[i]
        while p is not None:
            seen.add(p)
            p = parents[p]
        ancestors.append(seen)
    return labels, ancestors


def ted_oracle(t1, t2):
    """Minimum cost over all valid edit mappings (exhaustive, branch and bound).

    A mapping is valid when it is one-to-one, preserves postorder, and
    preserves the ancestor relation in both directions; its cost is the
    number of relabeled pairs plus unmapped nodes on either side.
    """
    labels1, anc1 = _flatten(t1)
    labels2, anc2 = _flatten(t2)
    n1, n2 = len(labels1), len(labels2)
    best = n1 + n2

    def extend(i, pairs, used2, n_used2, cost):
        nonlocal best
        if cost + abs((n1 - i) - (n2 - n_used2)) >= best:
            return
        if i == n1:
            best = cost + (n2 - n_used2)
            return
        extend(i + 1, pairs, used2, n_used2, cost + 1)  # delete node i
        for j in range(n2):
            if used2 >> j & 1:
                continue
            if all(b < j and (i in anc1[a]) == (j in anc2[b]) for a, b in pairs):
                pairs.append((i, j))
                extend(i + 1, pairs, used2 | 1 << j, n_used2 + 1,
                       cost + (labels1[i] != labels2[j]))
                pairs.pop()

    extend(0, [], 0, 0, 0)
    return best


def tree_forests(k):
    """Every ordered forest with k nodes, as tuples of (label, children)."""
    if k == 0:
        return [()]
    out = []
    for first in range(1, k + 1):
        for tree in tree_shapes(first):
            for rest in tree_forests(k - first):
                out.append((tree,) + rest)
    return out


def tree_shapes(n):
    """Every ordered rooted tree shape with n nodes ('*' placeholder labels)."""
    return [("*", children) for children in tree_forests(n - 1)]


def rotate_labels(shape, rotation, alphabet=("A", "B", "C")):
    """Deterministic labeling: postorder index + rotation, mod alphabet."""
    counter = [0]

    def relabel(node):
        children = tuple(relabel(c) for c in node[1])
        label = alphabet[(counter[0] + rotation) % len(alphabet)]
        counter[0] += 1
        return (label, children)

    return relabel(shape)
