"""Bracketed parse trees, pruning, and exact ordered tree edit distance."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._dispatch import ted_kernel


class MetricsError(ValueError):
    pass


@dataclass
class ParseTree:
    label: str
    children: list["ParseTree"] = field(default_factory=list)
    is_word: bool = False    # leaf that was a bare token, not a bracketed label

    def n_nodes(self) -> int:
        return 1 + sum(c.n_nodes() for c in self.children)

    def to_bracketed(self) -> str:
        if self.is_word:
            return self.label
        if not self.children:
            return f"({self.label})"
        inner = " ".join(c.to_bracketed() for c in self.children)
        return f"({self.label} {inner})"


def parse_bracketed(line: str) -> ParseTree:
    """One balanced bracketed tree; errors carry the character offset."""
    pos = 0
    n = len(line)

    def skip_ws():
        nonlocal pos
        while pos < n and line[pos].isspace():
            pos += 1

    def atom() -> str:
        nonlocal pos
        start = pos
        while pos < n and line[pos] not in "()" and not line[pos].isspace():
            pos += 1
        return line[start:pos]

    def node() -> ParseTree:
        nonlocal pos
        if pos >= n or line[pos] != "(":
            raise MetricsError(f"offset {pos}: expected '('")
        open_at = pos
        pos += 1
        skip_ws()
        label = atom()
        if not label:
            raise MetricsError(f"offset {pos}: empty node label")
        children = []
        while True:
            skip_ws()
            if pos >= n:
                raise MetricsError(
                    f"offset {open_at}: unbalanced '(' (no matching ')')")
            if line[pos] == ")":
                pos += 1
                return ParseTree(label, children)
            if line[pos] == "(":
                children.append(node())
            else:
                children.append(ParseTree(atom(), is_word=True))

    skip_ws()
    tree = node()
    skip_ws()
    if pos < n:
        raise MetricsError(f"offset {pos}: trailing input after the root tree")
    return tree


def read_parse_file(path) -> list[ParseTree | None]:
    """One tree per line, line-aligned; empty line or '-' marks a missing parse."""
    out: list[ParseTree | None] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped == "-":
            out.append(None)
            continue
        try:
            out.append(parse_bracketed(stripped))
        except MetricsError as exc:
            raise MetricsError(f"{path}:{lineno}: {exc}") from None
    return out


def prune_for_pted(tree: ParseTree) -> ParseTree:
    """Depth cut then leaf removal, for the structural-diversity distance.

    Keep nodes at depth <= 2 (root = depth 0, three levels total), then
    remove every remaining leaf in one simultaneous pass; the root survives
    even when it is itself a leaf.
    """
    def cut(node: ParseTree, depth: int) -> ParseTree:
        if depth == 2:
            return ParseTree(node.label, [], node.is_word)
        return ParseTree(node.label, [cut(c, depth + 1) for c in node.children],
                         node.is_word)

    def drop_leaves(node: ParseTree) -> ParseTree:
        kept = [drop_leaves(c) for c in node.children if c.children]
        return ParseTree(node.label, kept, node.is_word)

    return drop_leaves(cut(tree, 0))


def _postorder(tree: ParseTree) -> list[ParseTree]:
    out: list[ParseTree] = []

    def walk(node):
        for c in node.children:
            walk(c)
        out.append(node)

    walk(tree)
    return out


def _ted_arrays(tree: ParseTree, intern: dict[str, int]):
    """1-indexed postorder labels, leftmost-leaf descendants, keyroots."""
    nodes = _postorder(tree)
    pos = {id(node): i for i, node in enumerate(nodes, 1)}
    n = len(nodes)
    labels = np.zeros(n + 1, dtype=np.int64)
    lmld = np.zeros(n + 1, dtype=np.int64)
    for i, node in enumerate(nodes, 1):
        labels[i] = intern.setdefault(node.label, len(intern))
        lmld[i] = lmld[pos[id(node.children[0])]] if node.children else i
    last: dict[int, int] = {}
    for i in range(1, n + 1):
        last[int(lmld[i])] = i
    keyroots = np.array(sorted(last.values()), dtype=np.int64)
    return labels, lmld, keyroots


def tree_edit_distance(t1: ParseTree, t2: ParseTree) -> int:
    """Minimum unit-cost relabel/insert/delete script between ordered trees."""
    intern: dict[str, int] = {}
    a1, m1, k1 = _ted_arrays(t1, intern)
    a2, m2, k2 = _ted_arrays(t2, intern)
    return int(ted_kernel(a1, m1, k1, a2, m2, k2))
