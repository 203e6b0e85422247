"""Connected weighted undirected graphs and their derived matrices.

Vertices are 1-indexed at the API boundary. Matrices are 0-indexed numpy
arrays, so vertex ``v`` is row ``v - 1``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    GenerationFailed,
    GraphFormatError,
    InvalidVertex,
    NonpositiveWeight,
    SelfLoop,
)

Edge = tuple[int, int, float]

GRAPH_KINDS = ("path", "ring", "complete", "random")
WEIGHT_MODES = ("unit", "loguniform")
MAX_GENERATION_RETRIES = 1000


@dataclass(frozen=True)
class WeightedGraph:
    """Validated graph. ``edges`` are canonical ``(min, max, w)`` triples in
    lexicographic order; edge ``e`` (1-based) is ``edges[e - 1]``.

    ``orientation`` holds the (source, sink) pair used for the incidence
    matrix. It defaults to source = smaller vertex id.
    """

    n: int
    edges: tuple[Edge, ...]
    orientation: tuple[tuple[int, int], ...]

    @property
    def k(self) -> int:
        return len(self.edges)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)

    def flipped(self, edge_indices: Iterable[int]) -> "WeightedGraph":
        """Copy with the direction of the given 0-based edges reversed."""
        flip = set(edge_indices)
        orientation = tuple(
            (b, a) if e in flip else (a, b) for e, (a, b) in enumerate(self.orientation)
        )
        return WeightedGraph(self.n, self.edges, orientation)

    def scaled(self, factor: float) -> "WeightedGraph":
        if not factor > 0:
            raise NonpositiveWeight(f"scale factor must be positive, got {factor}", factor)
        edges = tuple((i, j, w * factor) for i, j, w in self.edges)
        return WeightedGraph(self.n, edges, self.orientation)

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[i, j, w] for i, j, w in self.edges]}


@dataclass(frozen=True, eq=False)
class GraphMatrices:
    A: np.ndarray
    D: np.ndarray
    L: np.ndarray
    R: np.ndarray
    W: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def k(self) -> int:
        return self.R.shape[1]

    @cached_property
    def output_map(self) -> np.ndarray:
        """``W^{1/2} R^T``, the k x n map from states to edge disagreements."""
        return np.sqrt(np.diag(self.W))[:, None] * self.R.T

    @cached_property
    def spectrum(self):
        from .system import laplacian_spectrum

        return laplacian_spectrum(self)


def build_graph(n: int, edges: Iterable[Sequence[float]]) -> WeightedGraph:
    """Validate and canonicalize an edge list.

    Raises
    ------
    InvalidVertex, SelfLoop, DuplicateEdge, NonpositiveWeight, DisconnectedGraph
    """
    if int(n) != n or n < 2:
        raise InvalidVertex(f"need n >= 2 vertices, got {n}", n)
    n = int(n)
    seen: dict[tuple[int, int], Edge] = {}
    for raw in edges:
        if len(raw) == 2:
            i, j, w = raw[0], raw[1], 1.0
        elif len(raw) == 3:
            i, j, w = raw
        else:
            raise GraphFormatError(f"edge must be (i, j) or (i, j, w), got {raw!r}", list(raw))
        if int(i) != i or int(j) != j:
            raise InvalidVertex(f"vertex ids must be integers, got edge {raw!r}", list(raw))
        i, j, w = int(i), int(j), float(w)
        for v in (i, j):
            if not 1 <= v <= n:
                raise InvalidVertex(f"vertex {v} outside 1..{n} in edge {(i, j, w)}", [i, j, w])
        if i == j:
            raise SelfLoop(f"self-loop at vertex {i}", [i, j, w])
        if not (w > 0 and math.isfinite(w)):
            raise NonpositiveWeight(f"edge ({i}, {j}) has weight {w}", [i, j, w])
        key = (min(i, j), max(i, j))
        if key in seen:
            raise DuplicateEdge(f"edge {key} listed more than once", [i, j, w])
        seen[key] = (key[0], key[1], w)
    if not seen:
        raise DisconnectedGraph("edge list is empty", [])
    canon = tuple(seen[key] for key in sorted(seen))
    _check_connected(n, canon)
    return WeightedGraph(n, canon, tuple((i, j) for i, j, _ in canon))


def _check_connected(n: int, edges: Sequence[Edge]) -> None:
    rows = [i - 1 for i, _, _ in edges]
    cols = [j - 1 for _, j, _ in edges]
    adj = coo_matrix((np.ones(len(edges)), (rows, cols)), shape=(n, n))
    ncomp, labels = connected_components(adj, directed=False)
    if ncomp > 1:
        # report the first vertex not reachable from vertex 1
        stray = int(np.flatnonzero(labels != labels[0])[0]) + 1
        raise DisconnectedGraph(
            f"graph has {ncomp} components; vertex {stray} is unreachable from vertex 1",
            stray,
        )


def derive_matrices(g: WeightedGraph) -> GraphMatrices:
    n, k = g.n, g.k
    A = np.zeros((n, n))
    R = np.zeros((n, k))
    for e, ((i, j, w), (src, snk)) in enumerate(zip(g.edges, g.orientation)):
        A[i - 1, j - 1] = A[j - 1, i - 1] = w
        R[src - 1, e] = 1.0
        R[snk - 1, e] = -1.0
    D = np.diag(A.sum(axis=1))
    L = D - A
    W = np.diag(g.weights)
    return GraphMatrices(A=A, D=D, L=L, R=R, W=W)


def generate_graph(
    kind: str,
    n: int,
    seed: int = 0,
    edge_prob: float = 0.5,
    weights: str = "unit",
    weight_range: tuple[float, float] = (0.1, 10.0),
) -> WeightedGraph:
    """Generate a test graph.

    ``random`` draws G(n, p) graphs from ``numpy.random.default_rng(seed)``
    until one is connected. ``weights="loguniform"`` draws each edge weight
    log-uniformly from ``weight_range`` with the same generator.
    """
    if kind not in GRAPH_KINDS:
        raise ValueError(f"unknown graph kind {kind!r}; choose from {GRAPH_KINDS}")
    if weights not in WEIGHT_MODES:
        raise ValueError(f"unknown weight mode {weights!r}; choose from {WEIGHT_MODES}")
    if n < 2:
        raise InvalidVertex(f"need n >= 2 vertices, got {n}", n)
    rng = np.random.default_rng(seed)

    if kind == "path":
        pairs = [(i, i + 1) for i in range(1, n)]
    elif kind == "ring":
        if n < 3:
            raise InvalidVertex("a ring needs n >= 3", n)
        pairs = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    elif kind == "complete":
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    else:
        if not 0 < edge_prob <= 1:
            raise ValueError(f"edge_prob must lie in (0, 1], got {edge_prob}")
        iu, ju = np.triu_indices(n, k=1)
        for _ in range(MAX_GENERATION_RETRIES):
            keep = rng.random(iu.size) < edge_prob
            pairs = [(int(i) + 1, int(j) + 1) for i, j in zip(iu[keep], ju[keep])]
            if pairs and _is_connected(n, pairs):
                break
        else:
            raise GenerationFailed(
                f"no connected G({n}, {edge_prob}) sample in {MAX_GENERATION_RETRIES} draws",
                {"n": n, "edge_prob": edge_prob, "seed": seed},
            )

    if weights == "unit":
        w = np.ones(len(pairs))
    else:
        lo, hi = weight_range
        w = np.exp(rng.uniform(np.log(lo), np.log(hi), size=len(pairs)))
    return build_graph(n, [(i, j, float(wij)) for (i, j), wij in zip(pairs, w)])


def _is_connected(n: int, pairs) -> bool:
    try:
        _check_connected(n, [(i, j, 1.0) for i, j in pairs])
    except DisconnectedGraph:
        return False
    return True


# -- I/O ---------------------------------------------------------------------

def graph_from_json(text: str) -> WeightedGraph:
    try:
        obj = json.loads(text)
        n = obj["n"]
        edges = obj["edges"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise GraphFormatError(f"bad graph JSON: {exc}") from exc
    return build_graph(n, edges)


def graph_from_csv(text: str, n: int | None = None) -> WeightedGraph:
    """Parse an ``i,j,w`` edge list. ``n`` defaults to the largest vertex id."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["i", "j", "w"]:
        raise GraphFormatError(f"CSV header must be i,j,w; got {reader.fieldnames}")
    edges = []
    for row in reader:
        try:
            edges.append((int(row["i"]), int(row["j"]), float(row["w"])))
        except (TypeError, ValueError) as exc:
            raise GraphFormatError(f"bad CSV row {row}: {exc}", row) from exc
    if n is None:
        n = max((max(i, j) for i, j, _ in edges), default=0)
    return build_graph(n, edges)


def load_graph(path) -> WeightedGraph:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return graph_from_csv(text)
    if path.suffix.lower() == ".json":
        return graph_from_json(text)
    return graph_from_json(text) if text.lstrip().startswith("{") else graph_from_csv(text)


def graph_to_json(g: WeightedGraph) -> str:
    return json.dumps(g.to_dict())


def graph_to_csv(g: WeightedGraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j", "w"])
    for i, j, w in g.edges:
        writer.writerow([i, j, repr(w)])
    return buf.getvalue()
