"""Immutable d-regular (multi)graphs stored as an edge-end table.

Vertices are 1-based at the public interface and 0-based internally. Row ``v``
of :attr:`Graph.ends` lists the far endpoint of each of the ``d`` edge-ends at
``v``; a loop occupies two ends and therefore lists ``v`` twice.
"""

import csv
import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import InputError


@dataclass(frozen=True, eq=False)
class Graph:
    ends: np.ndarray
    simple: bool = field(default=None)

    def __post_init__(self):
        ends = np.ascontiguousarray(self.ends, dtype=np.int64)
        if ends.ndim != 2:
            raise InputError("edge-end table must be two-dimensional")
        n, d = ends.shape
        if n == 0:
            raise InputError("graph needs at least one vertex")
        if (n * d) % 2:
            raise InputError(f"n*d must be even (n={n}, d={d})")
        if ends.size and (ends.min() < 0 or ends.max() >= n):
            raise InputError("neighbor id out of range")
        ends.setflags(write=False)
        object.__setattr__(self, "ends", ends)
        if self.simple is None:
            object.__setattr__(self, "simple", _is_simple(ends))

    @property
    def n(self):
        return self.ends.shape[0]

    @property
    def d(self):
        return self.ends.shape[1]

    @property
    def edge_count(self):
        return self.n * self.d // 2

    def neighbors(self, v):
        """Far endpoints of the edge-ends at vertex ``v`` (1-based in and out)."""
        return [int(u) + 1 for u in self.ends[_check_vertex(self, v)]]

    def adjacency_matrix(self):
        """Dense symmetric adjacency matrix; a loop adds 2 on the diagonal."""
        A = np.zeros((self.n, self.n), dtype=np.float64)
        rows = np.repeat(np.arange(self.n), self.d)
        np.add.at(A, (rows, self.ends.ravel()), 1.0)
        return A

    def sparse_adjacency(self):
        from scipy.sparse import csr_matrix

        data = np.ones(self.n * self.d)
        indptr = np.arange(0, self.n * self.d + 1, self.d)
        A = csr_matrix((data, self.ends.ravel(), indptr), shape=(self.n, self.n))
        A.sum_duplicates()
        return A

    def edges(self):
        """Each undirected edge once as a 1-based (u, v) pair, u <= v, with multiplicity."""
        out = []
        for v in range(self.n):
            loops = 0
            for u in self.ends[v]:
                u = int(u)
                if u == v:
                    loops += 1
                elif v < u:
                    out.append((v + 1, u + 1))
            out.extend([(v + 1, v + 1)] * (loops // 2))
        out.sort()
        return out

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.ends.shape == other.ends.shape and np.array_equal(
            np.sort(self.ends, axis=1), np.sort(other.ends, axis=1)
        )

    def __repr__(self):
        return f"Graph(n={self.n}, d={self.d}, simple={self.simple})"


def _is_simple(ends):
    n = ends.shape[0]
    if (ends == np.arange(n)[:, None]).any():
        return False
    s = np.sort(ends, axis=1)
    return not bool((s[:, 1:] == s[:, :-1]).any())


def _check_vertex(g, v):
    v = int(v)
    if not 1 <= v <= g.n:
        raise InputError(f"vertex {v} out of range 1..{g.n}")
    return v - 1


def vertex_mask(g, s):
    """Boolean membership mask for a 1-based vertex collection."""
    idx = np.asarray(list(s), dtype=np.int64)
    mask = np.zeros(g.n, dtype=bool)
    if idx.size == 0:
        return mask
    if idx.min() < 1 or idx.max() > g.n:
        raise InputError(f"vertex set has ids outside 1..{g.n}")
    if np.unique(idx).size != idx.size:
        raise InputError("vertex set has duplicate ids")
    mask[idx - 1] = True
    return mask


def _as_mask(g, s):
    if isinstance(s, np.ndarray) and s.dtype == bool:
        if s.shape != (g.n,):
            raise InputError("mask has wrong length")
        return s
    return vertex_mask(g, s)


def degrees_into(g, s):
    """d_S(v) for every vertex: number of edge-ends at v landing in S."""
    mask = _as_mask(g, s)
    return mask[g.ends].sum(axis=1)


def edges_within(g, s):
    """Number of edges with both endpoints in ``s``; loops count once."""
    mask = _as_mask(g, s)
    return int(mask[g.ends][mask].sum()) // 2


def edges_between(g, s, s2):
    """Number of edges joining ``s`` to ``s2`` (disjoint), with multiplicity."""
    m1 = _as_mask(g, s)
    m2 = _as_mask(g, s2)
    if (m1 & m2).any():
        raise InputError("edges_between needs disjoint vertex sets")
    return int(m2[g.ends][m1].sum())


class Layers(tuple):
    """Layer sizes |D_0|, |D_1|, ... of a breadth-first search.

    Also carries the distance array so tree-ness of a ball can be queried.
    """

    def __new__(cls, sizes, graph, dist):
        obj = super().__new__(cls, sizes)
        obj.graph = graph
        obj.dist = dist
        return obj

    def ball(self, depth):
        return (self.dist >= 0) & (self.dist <= depth)

    def is_tree_up_to(self, depth):
        """True iff the ball of radius ``depth`` induces exactly |ball| - 1 edges."""
        ball = self.ball(depth)
        return edges_within(self.graph, ball) == int(ball.sum()) - 1


def bfs_layers(g, root):
    r = _check_vertex(g, root)
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[r] = 0
    frontier = np.array([r])
    sizes = [1]
    depth = 0
    while frontier.size:
        depth += 1
        nxt = np.unique(g.ends[frontier].ravel())
        nxt = nxt[dist[nxt] < 0]
        if nxt.size == 0:
            break
        dist[nxt] = depth
        sizes.append(int(nxt.size))
        frontier = nxt
    return Layers(sizes, g, dist)


def is_connected(g):
    return sum(bfs_layers(g, 1)) == g.n


# --- constructors -----------------------------------------------------------

def from_neighbor_lists(rows):
    """Build from 1-based neighbor lists (one list of d far endpoints per vertex)."""
    arr = np.asarray(rows, dtype=np.int64)
    if arr.ndim != 2:
        raise InputError("all vertices must have the same degree")
    return Graph(arr - 1)


def from_edges(n, edges):
    """Build from 1-based undirected edges; (v, v) is a loop."""
    rows = [[] for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if not (1 <= u <= n and 1 <= v <= n):
            raise InputError(f"edge ({u}, {v}) out of range 1..{n}")
        rows[u - 1].append(v - 1)
        rows[v - 1].append(u - 1)
    degs = {len(r) for r in rows}
    if len(degs) != 1:
        raise InputError(f"graph is not regular (degrees {sorted(degs)})")
    return Graph(np.array([sorted(r) for r in rows], dtype=np.int64).reshape(n, -1))


def complete_graph(n):
    idx = np.arange(n)
    ends = np.array([np.delete(idx, v) for v in range(n)], dtype=np.int64).reshape(n, n - 1)
    return Graph(ends, simple=True)


def petersen_graph():
    """Outer 5-cycle on 1..5, spokes i -- i+5, inner pentagram on 6..10."""
    edges = [(i, i % 5 + 1) for i in range(1, 6)]
    edges += [(i, i + 5) for i in range(1, 6)]
    edges += [(i + 5, (i + 1) % 5 + 6) for i in range(1, 6)]
    return from_edges(10, edges)


def disjoint_union(*graphs):
    d = graphs[0].d
    if any(h.d != d for h in graphs):
        raise InputError("disjoint union needs equal degrees")
    parts, offset = [], 0
    for h in graphs:
        parts.append(h.ends + offset)
        offset += h.n
    return Graph(np.vstack(parts))


def load_fixture(name):
    """Shipped adjacency-list fixtures: ``k4`` and ``petersen``."""
    text = resources.files("pushspread").joinpath("data", f"{name}.adj").read_text()
    return parse_adjacency(text)


# --- serialization ----------------------------------------------------------

def format_adjacency(g):
    lines = []
    for v in range(g.n):
        nbrs = " ".join(str(int(u) + 1) for u in sorted(g.ends[v]))
        lines.append(f"{v + 1}: {nbrs}")
    return "\n".join(lines) + "\n"


def parse_adjacency(text):
    rows = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise InputError(f"line {lineno}: expected 'v: u1 ... ud'")
        v = int(head)
        if v in rows:
            raise InputError(f"line {lineno}: vertex {v} listed twice")
        rows[v] = [int(x) for x in tail.split()]
    n = len(rows)
    if sorted(rows) != list(range(1, n + 1)):
        raise InputError("adjacency list must cover vertices 1..n exactly once")
    g = from_neighbor_lists([rows[v] for v in range(1, n + 1)])
    _check_symmetric(g)
    return g


def _check_symmetric(g):
    for v in range(g.n):
        for u in set(g.ends[v].tolist()):
            if np.count_nonzero(g.ends[v] == u) != np.count_nonzero(g.ends[u] == v):
                raise InputError(f"adjacency not symmetric between {v + 1} and {u + 1}")


def format_edge_csv(g):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v"])
    w.writerows(g.edges())
    return buf.getvalue()


def parse_edge_csv(text, n=None):
    edges = []
    for row in csv.reader(io.StringIO(text)):
        if not row or not row[0].strip():
            continue
        if row[0].strip() == "u":
            continue
        edges.append((int(row[0]), int(row[1])))
    if n is None:
        n = max(max(e) for e in edges)
    return from_edges(n, edges)


def read_graph(path):
    """Read either format, chosen by extension (.csv = edge list, else adjacency)."""
    with open(path) as fh:
        text = fh.read()
    if str(path).endswith(".csv"):
        return parse_edge_csv(text)
    return parse_adjacency(text)


def write_graph(g, path):
    text = format_edge_csv(g) if str(path).endswith(".csv") else format_adjacency(g)
    with open(path, "w") as fh:
        fh.write(text)
