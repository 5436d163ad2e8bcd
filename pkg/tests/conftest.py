from __future__ import annotations

import random
from collections.abc import Callable
from pathlib import Path

import pytest

from braidscape.tree import Tree, build_tree

TREES_DIR = Path(__file__).resolve().parent.parent / "trees"


def _star(degree: int) -> Tree:
    leaves = [f"x{i}" for i in range(1, degree)]
    adjacency = {"b": ["c"], "c": ["b", *leaves]}
    adjacency.update({leaf: ["c"] for leaf in leaves})
    return build_tree(adjacency, "b")


def _caterpillar(m: int) -> Tree:
    spine = [f"s{i}" for i in range(1, m + 1)]
    adjacency: dict[str, list[str]] = {"b": [spine[0]]}
    for index, vertex in enumerate(spine):
        previous = "b" if index == 0 else spine[index - 1]
        following = "t" if index == m - 1 else spine[index + 1]
        adjacency[vertex] = [previous, f"l{index + 1}", following]
        adjacency[f"l{index + 1}"] = [vertex]
    adjacency["t"] = [spine[-1]]
    return build_tree(adjacency, "b")


def _path(edges: int) -> Tree:
    names = ["b", *(f"p{i}" for i in range(1, edges + 1))]
    adjacency = {
        name: [x for x in (names[i - 1] if i > 0 else None, names[i + 1] if i < edges else None) if x]
        for i, name in enumerate(names)
    }
    return build_tree(adjacency, "b")


def _random_tree(seed: int, size: int) -> Tree:
    rng = random.Random(seed)
    adjacency: dict[str, list[str]] = {"b": []}
    for index in range(size):
        open_slots = [v for v, ns in adjacency.items() if (v == "b" and not ns) or (v != "b" and len(ns) < 4)]
        parent = rng.choice(sorted(open_slots))
        child = f"v{index}"
        adjacency[parent].append(child)
        adjacency[child] = [parent]
    return build_tree(adjacency, "b")


@pytest.fixture
def y_tree() -> Tree:
    return _star(3)


@pytest.fixture
def h_tree() -> Tree:
    return _caterpillar(2)


@pytest.fixture
def make_star() -> Callable[[int], Tree]:
    return _star


@pytest.fixture
def make_caterpillar() -> Callable[[int], Tree]:
    return _caterpillar


@pytest.fixture
def make_path() -> Callable[[int], Tree]:
    return _path


@pytest.fixture
def trees_dir() -> Path:
    return TREES_DIR


_CORPUS = {
    "path": lambda: _path(4),
    "y": lambda: _star(3),
    "h": lambda: _caterpillar(2),
    "star4": lambda: _star(4),
    "caterpillar4": lambda: _caterpillar(4),
}


@pytest.fixture(params=sorted(_CORPUS))
def corpus_tree(request) -> Tree:
    return _CORPUS[request.param]()


@pytest.fixture
def make_random_tree() -> Callable[[int, int], Tree]:
    return _random_tree
