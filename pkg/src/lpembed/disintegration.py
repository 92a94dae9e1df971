"""Trees of finite integer sequences and Lp-formal disintegrations.

A node is a tuple of nonnegative ints; ``()`` is the root.  A
:class:`Disintegration` maps every node of a finite tree to a vector, and the
checks below test the defining properties: each node vector is the sum of its
children's, vectors at incomparable nodes are Lp-formally disjointly
supported, and no node vector is zero.  :func:`lift_isomorphism` turns a
norm-preserving tree isomorphism into the induced linear isometry.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from lpembed.reports import CheckReport
from lpembed.spaces import DyadicStep, Field, is_formally_disjoint, lp_norm

Node = tuple[int, ...]


def is_prefix(a: Node, b: Node) -> bool:
    """a is a prefix of b (a and b may be equal)."""
    return len(a) <= len(b) and b[: len(a)] == a


def comparable(a: Node, b: Node) -> bool:
    return is_prefix(a, b) or is_prefix(b, a)


class FiniteTree:
    """A finite prefix-closed set of integer sequences containing the root."""

    def __init__(self, nodes: Iterable[Iterable[int]]):
        nodes = frozenset(tuple(int(x) for x in node) for node in nodes)
        if () not in nodes:
            raise ValueError("a tree must contain the empty sequence")
        for node in nodes:
            if any(x < 0 for x in node):
                raise ValueError(f"negative entry in {node}")
            if node and node[:-1] not in nodes:
                raise ValueError(f"not prefix-closed: {node} is present but {node[:-1]} is not")
        self.nodes = nodes
        kids: dict[Node, list[Node]] = {node: [] for node in nodes}
        for node in nodes:
            if node:
                kids[node[:-1]].append(node)
        self._children = {k: tuple(sorted(v)) for k, v in kids.items()}

    @classmethod
    def closure(cls, nodes: Iterable[Iterable[int]]) -> "FiniteTree":
        """Smallest tree containing ``nodes``."""
        out = {()}
        for node in nodes:
            node = tuple(node)
            out.update(node[:k] for k in range(len(node) + 1))
        return cls(out)

    def __contains__(self, node) -> bool:
        return tuple(node) in self.nodes

    def __iter__(self) -> Iterator[Node]:
        return iter(sorted(self.nodes, key=lambda s: (len(s), s)))

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteTree) and self.nodes == other.nodes

    def __hash__(self) -> int:
        return hash(self.nodes)

    def __repr__(self) -> str:
        return f"FiniteTree({sorted(self.nodes, key=lambda s: (len(s), s))!r})"

    def children(self, node: Node) -> tuple[Node, ...]:
        return self._children[tuple(node)]

    def is_terminal(self, node: Node) -> bool:
        return not self._children[tuple(node)]

    @cached_property
    def terminals(self) -> tuple[Node, ...]:
        return tuple(n for n in self if not self._children[n])

    @property
    def height(self) -> int:
        return max(len(n) for n in self.nodes)

    def subtree(self, nodes: Iterable[Node]) -> "FiniteTree":
        """Smallest subtree containing ``nodes`` in which every non-terminal
        node keeps all of its children.  Summative maps restricted to such a
        subtree stay summative."""
        base = FiniteTree.closure(nodes).nodes
        full = set(base)
        for node in base:
            if any(len(m) > len(node) and is_prefix(node, m) for m in base):
                full.update(self.children(node))
        return FiniteTree(full)

    def count_maximal_antichains(self, node: Node = ()) -> int:
        kids = self.children(node)
        if not kids:
            return 1
        return 1 + math.prod(self.count_maximal_antichains(k) for k in kids)

    def maximal_antichains(self, node: Node = ()) -> Iterator[tuple[Node, ...]]:
        """All maximal antichains (cuts) of the subtree below ``node``."""
        yield (node,)
        kids = self.children(node)
        if kids:
            for parts in itertools.product(*(list(self.maximal_antichains(k)) for k in kids)):
                yield tuple(itertools.chain.from_iterable(parts))

    def random_maximal_antichain(self, rng: np.random.Generator, stop: float = 0.5) -> tuple[Node, ...]:
        out = []
        stack = [()]
        while stack:
            node = stack.pop()
            kids = self.children(node)
            if not kids or rng.random() < stop:
                out.append(node)
            else:
                stack.extend(kids)
        return tuple(sorted(out))

    def to_record(self) -> list[list[int]]:
        return [list(n) for n in self]


def collapse_to_leaves(tree: FiniteTree, beta: Mapping[Node, complex]) -> dict[Node, complex]:
    """gamma_nu = sum of beta over the prefixes of nu, for each terminal nu.

    For a summative map phi on ``tree``, sum_F beta phi = sum_terminals gamma phi.
    Missing entries of ``beta`` count as 0.
    """
    prefix_sum: dict[Node, complex] = {}
    for node in tree:
        parent = prefix_sum[node[:-1]] if node else 0
        prefix_sum[node] = parent + beta.get(node, 0)
    return {leaf: prefix_sum[leaf] for leaf in tree.terminals}


def _default_norm(vector, p: float) -> Callable:
    if isinstance(vector, DyadicStep):
        return lambda v: lp_norm(v, p)
    from lpembed.stable import SampleVector, empirical_lp_norm

    if isinstance(vector, SampleVector):
        return lambda v: empirical_lp_norm(v, p)
    raise TypeError(f"no default norm for {type(vector).__name__}; pass norm=")


@dataclass(eq=False)
class Disintegration:
    tree: FiniteTree
    assign: dict[Node, object]
    p: float
    norm: Callable | None = None
    field: Field = Field.REAL

    def __post_init__(self):
        self.assign = {tuple(k): v for k, v in self.assign.items()}
        missing = set(self.tree.nodes) - set(self.assign)
        if missing:
            raise ValueError(f"no vector assigned to {sorted(missing)[:5]}")
        # the built-in step-function norm lets checks take vectorized paths
        self.step_norm = self.norm is None and self.exact
        if self.norm is None:
            self.norm = _default_norm(self.assign[()], self.p)
        if any(getattr(v, "is_complex", False) for v in self.assign.values()):
            self.field = Field.COMPLEX

    @property
    def exact(self) -> bool:
        return all(isinstance(v, DyadicStep) for v in self.assign.values())

    def __getitem__(self, node) -> object:
        return self.assign[tuple(node)]

    def combination(self, coeffs: Mapping[Node, complex]):
        """sum_nu coeffs[nu] * phi(nu), summed directly."""
        total = None
        for node, a in coeffs.items():
            term = a * self.assign[tuple(node)]
            total = term if total is None else total + term
        if total is None:
            total = 0 * self.assign[()]
        return total

    def to_record(self) -> dict:
        return {
            "p": self.p,
            "nodes": self.tree.to_record(),
            "vectors": {
                json.dumps(list(node)): self.assign[node].to_record() for node in self.tree
            },
        }

    @classmethod
    def from_record(cls, record: dict) -> "Disintegration":
        tree = FiniteTree(record["nodes"])
        assign = {tuple(json.loads(k)): DyadicStep.from_record(v) for k, v in record["vectors"].items()}
        return cls(tree, assign, record["p"])


def default_tol(d: Disintegration, exact_tol: float = 0.0) -> float:
    return exact_tol if d.exact else 1e-9


def check_summative(d: Disintegration, tol: float | None = None) -> CheckReport:
    """|| phi(nu) - sum of phi over the children of nu || at every non-terminal node."""
    report = CheckReport("summative", default_tol(d) if tol is None else tol)
    for node in d.tree:
        kids = d.tree.children(node)
        if not kids:
            continue
        total = d.assign[kids[0]]
        for k in kids[1:]:
            total = total + d.assign[k]
        report.record(d.norm(d.assign[node] - total), node=list(node))
    return report


def check_never_zero(d: Disintegration) -> CheckReport:
    report = CheckReport("never_zero", 0.0)
    for node in d.tree:
        report.checked += 1
        if d.norm(d.assign[node]) == 0:
            report.fail("zero vector", node=list(node))
    return report


def check_formally_separating(
    d: Disintegration,
    trials: int = 16,
    tol: float = 1e-9,
    seed: int = 0,
    max_antichains: int = 4096,
) -> CheckReport:
    """Lp-formal disjointness of the vectors on maximal antichains.

    Subsets of a formally disjoint family are formally disjoint (set the extra
    scalars to 0), so maximal antichains suffice.  They are enumerated
    exhaustively when there are at most ``max_antichains`` of them, otherwise
    ``max_antichains`` random ones are drawn.
    """
    report = CheckReport("formally_separating", tol)
    count = d.tree.count_maximal_antichains()
    if count <= max_antichains:
        antichains: Iterable = d.tree.maximal_antichains()
        report.details["mode"] = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        antichains = (d.tree.random_maximal_antichain(rng) for _ in range(max_antichains))
        report.details["mode"] = "sampled"
    report.details["maximal_antichains"] = count
    for i, chain in enumerate(antichains):
        if len(chain) < 2:
            continue
        res = is_formally_disjoint(
            [d.assign[n] for n in chain], d.p, norm=None if d.step_norm else d.norm, trials=trials, tol=tol, seed=seed + i, field=d.field
        )
        report.record(res.worst_residual, antichain=[list(n) for n in chain])
    return report


@dataclass(frozen=True)
class TreeIso:
    mapping: dict[Node, Node]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Iterable[int], Iterable[int]]]) -> "TreeIso":
        return cls({tuple(a): tuple(b) for a, b in pairs})

    @classmethod
    def identity(cls, tree: FiniteTree) -> "TreeIso":
        return cls({n: n for n in tree})

    def __call__(self, node) -> Node:
        return self.mapping[tuple(node)]

    def to_pairs(self) -> list[list[list[int]]]:
        return [[list(a), list(b)] for a, b in sorted(self.mapping.items(), key=lambda kv: (len(kv[0]), kv[0]))]


def tree_isomorphism_check(d0: Disintegration, d1: Disintegration, f: TreeIso, tol: float | None = None) -> CheckReport:
    """Bijective, order-preserving both ways, and norm-matching on every node."""
    if tol is None:
        tol = 0.0 if (d0.exact and d1.exact) else 1e-9
    report = CheckReport("tree_isomorphism", tol)
    src, dst = d0.tree, d1.tree
    if set(f.mapping) != set(src.nodes):
        report.fail("map is not total on the source tree")
        return report
    image = set(f.mapping.values())
    if len(image) != len(src) or image != set(dst.nodes):
        report.fail("map is not a bijection onto the target tree")
        return report
    nodes = list(src)
    for a in nodes:
        for b in nodes:
            if is_prefix(a, b) != is_prefix(f(a), f(b)):
                report.fail("order not preserved", pair=[list(a), list(b)])
    for node in nodes:
        report.record(abs(d1.norm(d1.assign[f(node)]) - d0.norm(d0.assign[node])), node=list(node))
    return report


class LiftError(ValueError):
    """The hypotheses of the lifting construction fail for the given inputs."""


@dataclass
class LinearMap:
    """T with T(phi0(nu)) = phi1(f(nu)), evaluated on finite combinations.

    A span element is a mapping node -> coefficient standing for
    sum_nu a_nu phi0(nu).  Its image is computed by collapsing the
    coefficients onto the terminal nodes of the generated subtree, which gives
    the same vector for every representation of the same element.
    """

    d0: Disintegration
    d1: Disintegration
    f: TreeIso
    checks: list[CheckReport] = field(default_factory=list)

    def source(self, coeffs: Mapping[Node, complex]):
        return self.d0.combination(coeffs)

    def leaf_coefficients(self, coeffs: Mapping[Node, complex]) -> dict[Node, complex]:
        coeffs = {tuple(k): v for k, v in coeffs.items()}
        sub = self.d0.tree.subtree(coeffs)
        return collapse_to_leaves(sub, coeffs)

    def __call__(self, coeffs: Mapping[Node, complex]):
        gamma = self.leaf_coefficients(coeffs)
        return self.d1.combination({self.f(node): g for node, g in gamma.items()})

    def node_image(self, node):
        return self({tuple(node): 1.0})


def lift_isomorphism(
    d0: Disintegration,
    d1: Disintegration,
    f: TreeIso,
    tol: float | None = None,
    separating_tol: float = 1e-9,
    trials: int = 16,
) -> LinearMap:
    """Verify the hypotheses, then return the induced linear isometry."""
    checks = [
        check_summative(d0, tol),
        check_summative(d1, tol),
        check_never_zero(d0),
        check_never_zero(d1),
        check_formally_separating(d0, trials=trials, tol=separating_tol),
        check_formally_separating(d1, trials=trials, tol=separating_tol),
        tree_isomorphism_check(d0, d1, f, tol),
    ]
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise LiftError(f"lifting hypotheses fail: {', '.join(failed)}")
    return LinearMap(d0, d1, f, checks)


# Random instances ---------------------------------------------------------


def random_tree(rng: np.random.Generator, max_depth: int = 5, max_branch: int = 3, grow: float = 0.6) -> FiniteTree:
    """Random tree of height <= max_depth; every inner node has 1..max_branch children."""
    nodes = [()]
    frontier = [()]
    while frontier:
        node = frontier.pop()
        if len(node) >= max_depth or (node and rng.random() > grow):
            continue
        for k in range(int(rng.integers(1, max_branch + 1))):
            child = node + (k,)
            nodes.append(child)
            frontier.append(child)
    return FiniteTree(nodes)


def random_tree_iso(rng: np.random.Generator, tree: FiniteTree) -> TreeIso:
    """Random order isomorphism: permute the children of every node independently."""
    mapping = {(): ()}
    stack = [()]
    while stack:
        node = stack.pop()
        kids = tree.children(node)
        perm = rng.permutation(len(kids))
        for kid, k in zip(kids, perm):
            mapping[kid] = mapping[node] + (int(k),)
            stack.append(kid)
    return TreeIso(mapping)


def _random_blocks(rng: np.random.Generator, cells: int, count: int) -> list[tuple[int, int]]:
    cuts = np.sort(rng.choice(np.arange(1, cells), size=count - 1, replace=False)) if count > 1 else np.array([], int)
    edges = [0, *cuts.tolist(), cells]
    return list(zip(edges[:-1], edges[1:]))


def step_disintegration(
    tree: FiniteTree,
    leaf_blocks: Mapping[Node, tuple[int, int]],
    weights: Mapping[Node, float],
    level: int,
    p: float,
) -> Disintegration:
    """Leaf nu gets weights[nu] on cells [a, b) of level ``level``; inner nodes sum their children."""
    assign: dict[Node, DyadicStep] = {}
    for leaf in tree.terminals:
        vals = np.zeros(2 ** level)
        a, b = leaf_blocks[leaf]
        vals[a:b] = weights[leaf]
        assign[leaf] = DyadicStep(level, vals)
    for node in sorted(tree.nodes, key=len, reverse=True):
        if node not in assign:
            kids = tree.children(node)
            assign[node] = sum((assign[k] for k in kids[1:]), assign[kids[0]])
    return Disintegration(tree, assign, p)


def random_matched_pair(
    rng: np.random.Generator, p: float, max_depth: int = 5, max_branch: int = 3
) -> tuple[Disintegration, Disintegration, TreeIso]:
    """Two norm-matched step disintegrations over isomorphic random trees.

    Leaves get disjoint blocks with random weights in the source; the target
    uses a different random partition, and its weights are rescaled so that
    every leaf (hence, by disjointness, every node) has the same p-norm.
    """
    tree0 = random_tree(rng, max_depth, max_branch)
    f = random_tree_iso(rng, tree0)
    tree1 = FiniteTree(f.mapping.values())
    leaves = tree0.terminals
    level = max(1, math.ceil(math.log2(len(leaves))) + 2)
    cells = 2 ** level
    blocks0 = dict(zip(leaves, _random_blocks(rng, cells, len(leaves))))
    order1 = list(rng.permutation(len(leaves)))
    blocks1_list = _random_blocks(rng, cells, len(leaves))
    w0 = {leaf: float(rng.uniform(0.5, 2.0)) for leaf in leaves}
    blocks1, w1 = {}, {}
    for leaf, k in zip(leaves, order1):
        a, b = blocks1_list[k]
        blocks1[f(leaf)] = (a, b)
        len0 = blocks0[leaf][1] - blocks0[leaf][0]
        w1[f(leaf)] = w0[leaf] * (len0 / (b - a)) ** (1.0 / p)
    d0 = step_disintegration(tree0, blocks0, w0, level, p)
    d1 = step_disintegration(tree1, blocks1, w1, level, p)
    return d0, d1, f
