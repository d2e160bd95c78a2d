"""Graph and tuple machinery: half-cover decompositions, vertex values,
residual edge sets, matrix-derived comparison graphs, and the dyadic
event classification built on top of them.

Vertices and matrix row indices are 0-based throughout the Python API;
only the edge-list text format (:meth:`Graph.to_edge_text`) is 1-based.

The exact decomposition mode solves a sequence of minimum partial
vertex-cover problems by exhaustive search and is therefore restricted
to graphs on at most ``EXACT_MODE_MAX_N`` vertices.  The greedy mode
scales further but loses the minimality certificate, so verification
suites that rely on minimality only accept exact mode.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, PreconditionError, UnsupportedSizeError
from .linalg import as_matrix, dist_to_span, residual_norm, row_distances, span_basis

EXACT_MODE_MAX_N = 16
MODES = ("exact", "greedy")

Edge = tuple[int, int]


def _norm_edge(e) -> Edge:
    j, k = int(e[0]), int(e[1])
    if j == k:
        raise InvalidInputError(f"self-loop ({j},{k}) is not allowed")
    return (j, k) if j < k else (k, j)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on ``{0, ..., n-1}``.

    Edges are stored as a frozenset of ``(j, k)`` pairs with ``j < k``;
    construction normalizes orientation and rejects self-loops.
    """

    n: int
    edges: frozenset[Edge]

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInputError("vertex count must be non-negative")
        normalized = frozenset(_norm_edge(e) for e in self.edges)
        for j, k in normalized:
            if not (0 <= j < self.n and 0 <= k < self.n):
                raise InvalidInputError(f"edge ({j},{k}) out of range for n={self.n}")
        object.__setattr__(self, "edges", normalized)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, frozenset())

    @classmethod
    def complete(cls, n: int, exclude=()) -> "Graph":
        """Complete graph on the vertices of ``[0, n)`` not in ``exclude``."""
        keep = [v for v in range(n) if v not in set(exclude)]
        return cls(n, frozenset(itertools.combinations(keep, 2)))

    def is_isolated(self, v: int) -> bool:
        return all(v not in e for e in self.edges)

    def to_edge_text(self) -> str:
        """Serialize as one ``"j k"`` pair per line, 1-indexed."""
        lines = [f"{j + 1} {k + 1}" for j, k in sorted(self.edges)]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_edge_text(cls, text: str, n: int | None = None) -> "Graph":
        """Parse the 1-indexed edge-list format written by :meth:`to_edge_text`."""
        edges = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidInputError(f"malformed edge line: {line!r}")
            j, k = int(parts[0]) - 1, int(parts[1]) - 1
            if j < 0 or k < 0:
                raise InvalidInputError(f"edge line {line!r} is not 1-indexed")
            edges.append((j, k))
        if n is None:
            n = max((max(e) for e in edges), default=-1) + 1
        return cls(n, frozenset(edges))


@dataclass
class GreedyDecomposition:
    """Nested vertex sets halving the residual edge count at each step.

    ``s_seq[k]`` is the vertex set after ``k`` steps (``s_seq[0]`` is
    empty) and ``e_seq[k]`` is the set of original edges not incident to
    it; ``len(e_seq[k]) <= len(e_seq[k-1]) / 2`` for every computed step.
    In exact mode each ``s_seq[k]`` is a minimum-cardinality admissible
    superset of its predecessor, ties broken by lexicographically
    smallest sorted vertex list.
    """

    graph: Graph
    vertex: int
    mode: str
    depth: int
    s_seq: list[frozenset[int]]
    e_seq: list[frozenset[Edge]]


def _surviving(edges: frozenset[Edge], vertices) -> frozenset[Edge]:
    vs = set(vertices)
    return frozenset(e for e in edges if e[0] not in vs and e[1] not in vs)


def _exact_step(base: frozenset[int], prev_edges: frozenset[Edge]) -> frozenset[int]:
    """Minimum-cardinality superset of ``base`` leaving at most half of
    ``prev_edges`` uncovered; lexicographic tie-break on the full set."""
    if not prev_edges:
        return base
    candidates = sorted({v for e in prev_edges for v in e})
    for extra in range(len(candidates) + 1):
        best: tuple[int, ...] | None = None
        for combo in itertools.combinations(candidates, extra):
            remaining = sum(
                1 for j, k in prev_edges if j not in combo and k not in combo
            )
            if 2 * remaining <= len(prev_edges):
                key = tuple(sorted(base | set(combo)))
                if best is None or key < best:
                    best = key
        if best is not None:
            return frozenset(best)
    raise AssertionError("unreachable: removing all incident vertices empties the edge set")


def _greedy_step(base: frozenset[int], prev_edges: frozenset[Edge]) -> frozenset[int]:
    """Grow ``base`` by repeatedly taking the max-degree vertex of the
    residual graph (ties to the smallest index) until the count halves."""
    chosen = set(base)
    remaining = list(prev_edges)
    while 2 * len(remaining) > len(prev_edges):
        degrees: dict[int, int] = {}
        for j, k in remaining:
            degrees[j] = degrees.get(j, 0) + 1
            degrees[k] = degrees.get(k, 0) + 1
        v = min(degrees, key=lambda u: (-degrees[u], u))
        chosen.add(v)
        remaining = [e for e in remaining if v not in e]
    return frozenset(chosen)


def greedy_decomposition(G: Graph, i: int, depth: int, mode: str = "exact") -> GreedyDecomposition:
    """Compute the first ``depth`` steps of the half-cover decomposition
    rooted at the isolated vertex ``i``.

    Once the residual edge set is empty the sequences extend with
    ``s_seq[k] = s_seq[k-1]`` and empty edge sets.
    """
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES}")
    if depth < 1:
        raise InvalidInputError("depth must be a positive integer")
    if not (0 <= i < G.n):
        raise InvalidInputError(f"vertex {i} out of range for n={G.n}")
    if not G.is_isolated(i):
        raise InvalidInputError(f"vertex {i} must be isolated")
    if mode == "exact" and G.n > EXACT_MODE_MAX_N:
        raise UnsupportedSizeError(
            f"exact mode is exhaustive search, limited to n <= {EXACT_MODE_MAX_N} (got n={G.n})"
        )
    step = _exact_step if mode == "exact" else _greedy_step
    s_seq = [frozenset()]
    e_seq = [G.edges]
    for _ in range(depth):
        s_next = step(s_seq[-1], e_seq[-1])
        s_seq.append(s_next)
        e_seq.append(_surviving(G.edges, s_next))
    return GreedyDecomposition(graph=G, vertex=i, mode=mode, depth=depth, s_seq=s_seq, e_seq=e_seq)


def vertex_value(G: Graph, i: int, L: int, mode: str = "exact") -> float:
    """Robust size proxy ``min(max(2**(-L/2) sqrt(|E|), |S_L|), sqrt(|E|))``."""
    dec = greedy_decomposition(G, i, L, mode)
    root_e = math.sqrt(len(G.edges))
    return min(max(2.0 ** (-L / 2.0) * root_e, float(len(dec.s_seq[L]))), root_e)


def rho_set(G: Graph, i: int, L: int, mode: str = "exact") -> frozenset[Edge]:
    """Residual edge set just before the step of maximal vertex increment.

    Runs the decomposition to depth ``4 L`` and returns ``e_seq[k0 - 1]``
    where ``k0`` is the smallest step index achieving the largest
    ``|s_seq[k] - s_seq[k-1]|``; when all increments tie (for example on
    an empty graph) this is ``e_seq[0]``.
    """
    dec = greedy_decomposition(G, i, 4 * L, mode)
    increments = [len(dec.s_seq[k]) - len(dec.s_seq[k - 1]) for k in range(1, 4 * L + 1)]
    k0 = 1 + max(range(len(increments)), key=lambda idx: (increments[idx], -idx))
    return dec.e_seq[k0 - 1]


def check_edge_interval(G: Graph, i: int, k: int, ell: int, mode: str = "exact") -> bool:
    """Check ``2**l |E_k| <= |E_{k-l}| <= 2**l |E_k| + 2**(l+1) n``.

    Only exact-mode decompositions carry the minimality the bound
    relies on, so other modes are rejected.
    """
    if mode != "exact":
        raise InvalidInputError("edge-interval check requires exact mode")
    if not (0 < ell <= k):
        raise InvalidInputError(f"need 0 < ell <= k, got k={k}, ell={ell}")
    dec = greedy_decomposition(G, i, k, mode)
    lo = 2**ell * len(dec.e_seq[k])
    mid = len(dec.e_seq[k - ell])
    return lo <= mid <= lo + 2 ** (ell + 1) * G.n


def build_graph_G(B, i: int) -> Graph:
    """Comparison graph of matrix ``B`` seen from row ``i``.

    Pair ``(j, k)`` is an edge iff the distance from row ``i`` to the
    span of the rows outside ``{i, j, k}`` is at least the larger of the
    corresponding distances for rows ``j`` and ``k``.  Comparisons use
    exact floating-point ``>=`` (ties produce an edge); vertex ``i`` is
    isolated by construction.
    """
    A = as_matrix(B)
    n = A.shape[0]
    if n < 3:
        raise InvalidInputError("comparison graph needs n >= 3")
    if not (0 <= i < n):
        raise InvalidInputError(f"row index {i} out of range for n={n}")
    others = [v for v in range(n) if v != i]
    edges = []
    for j, k in itertools.combinations(others, 2):
        d = _complement_distances_cached(A, (i, j, k))
        if d[i] >= max(d[j], d[k]):
            edges.append((j, k))
    return Graph(n, frozenset(edges))


def _complement_distances_cached(A: np.ndarray, S: tuple[int, ...]) -> dict[int, float]:
    keep = np.setdiff1d(np.arange(A.shape[0]), S)
    basis = span_basis(A[keep]) if keep.size else np.zeros((0, A.shape[1]))
    return {m: residual_norm(A[m], basis) for m in S}


def build_graph_G_tilde(A, M, i: int, offset: float) -> Graph:
    """Offset comparison graph in which row ``i`` of the random part does
    not participate.

    Pair ``(j, k)`` is an edge iff ``dist(M[i], H) + offset`` is at least
    the larger of the distances of rows ``j`` and ``k`` of ``A + M`` to
    ``H``, where ``H`` is the span of the rows of ``A + M`` outside
    ``{i, j, k}``.
    """
    A2 = as_matrix(A)
    M2 = as_matrix(M)
    if A2.shape != M2.shape:
        raise InvalidInputError(f"shape mismatch: A is {A2.shape}, M is {M2.shape}")
    n = A2.shape[0]
    if n < 3:
        raise InvalidInputError("comparison graph needs n >= 3")
    if not (0 <= i < n):
        raise InvalidInputError(f"row index {i} out of range for n={n}")
    B = A2 + M2
    others = [v for v in range(n) if v != i]
    edges = []
    for j, k in itertools.combinations(others, 2):
        keep = np.setdiff1d(np.arange(n), (i, j, k))
        basis = span_basis(B[keep]) if keep.size else np.zeros((0, n))
        lhs = residual_norm(M2[i], basis) + offset
        if lhs >= max(residual_norm(B[j], basis), residual_norm(B[k], basis)):
            edges.append((j, k))
    return Graph(n, frozenset(edges))


def low_value_count(B, L: int, N: int, mode: str = "exact") -> int:
    """Number of rows whose comparison-graph vertex value is at most ``N``."""
    A = as_matrix(B)
    if N < 1:
        raise InvalidInputError("N must be a positive integer")
    count = 0
    for i in range(A.shape[0]):
        if vertex_value(build_graph_G(A, i), i, L, mode) <= N:
            count += 1
    return count


def min_half_cover_size(edges) -> int:
    """Size of a smallest vertex set incident to at least half the edges.

    Exhaustive search over subsets of the incident vertices, in
    increasing cardinality; an empty edge set is covered by the empty
    set.
    """
    es = [_norm_edge(e) for e in edges]
    need = (len(es) + 1) // 2
    if need == 0:
        return 0
    vertices = sorted({v for e in es for v in e})
    for size in range(1, len(vertices) + 1):
        for combo in itertools.combinations(vertices, size):
            chosen = set(combo)
            covered = sum(1 for j, k in es if j in chosen or k in chosen)
            if covered >= need:
                return size
    raise AssertionError("unreachable: all incident vertices cover every edge")


@dataclass
class DichotomyReport:
    """Outcome of the two-graph dichotomy check.

    ``cover_assertion`` states that every vertex set covering at least
    half of the residual edge set has size at least ``vl / (4 L^2)``
    (certified through the minimum half-cover size);
    ``small_value_assertion`` states ``vl <= 4 * 2**(-L/2) * n``.  At
    least one must hold whenever the edge-difference hypothesis does.
    """

    vertex: int
    L: int
    vl: float
    min_half_cover: int
    cover_threshold: float
    value_threshold: float
    cover_assertion: bool
    small_value_assertion: bool

    @property
    def holds(self) -> bool:
        return self.cover_assertion or self.small_value_assertion


_FLOAT_SLACK = 1e-9


def two_graphs_dichotomy(G: Graph, G_tilde: Graph, i: int, L: int) -> DichotomyReport:
    """Evaluate the dichotomy for a graph pair sharing isolated vertex ``i``.

    Requires ``|E(G) \\ E(G_tilde)| <= 16**(-L) n**2``; a violated
    hypothesis raises :class:`PreconditionError`, which is distinct from
    a report whose assertions both fail.
    """
    if G.n != G_tilde.n:
        raise InvalidInputError("graphs must share the vertex set")
    if L < 1:
        raise InvalidInputError("L must be a positive integer")
    diff = len(G.edges - G_tilde.edges)
    bound = 16.0 ** (-L) * G.n**2
    if diff > bound:
        raise PreconditionError(
            f"|E \\ E_tilde| = {diff} exceeds 16**(-L) n^2 = {bound:g}"
        )
    vl = vertex_value(G, i, L, mode="exact")
    rho = rho_set(G_tilde, i, L, mode="exact")
    cover = min_half_cover_size(rho)
    cover_threshold = vl / (4.0 * L * L)
    value_threshold = 4.0 * 2.0 ** (-L / 2.0) * G.n
    return DichotomyReport(
        vertex=i,
        L=L,
        vl=vl,
        min_half_cover=cover,
        cover_threshold=cover_threshold,
        value_threshold=value_threshold,
        cover_assertion=cover >= cover_threshold - _FLOAT_SLACK,
        small_value_assertion=vl <= value_threshold + _FLOAT_SLACK,
    )


def q_sets(B, I, tau: float, a: float, b: float, r: int):
    """Exhaustively classify all ``r``-subsets by their complement distances.

    Returns ``(Q1, Q2)`` as sets of frozensets: ``Q1`` holds the subsets
    ``S`` with some ``j in S & I`` at distance at most ``tau`` from the
    span of the rows outside ``S``; ``Q2`` holds the subsets meeting
    ``I`` with some ``j in S - I`` at distance at least
    ``tau * b / (2 a r)``.
    """
    A = as_matrix(B)
    n = A.shape[0]
    if r < 2:
        raise InvalidInputError("r must be at least 2")
    if r > n:
        raise InvalidInputError(f"r={r} exceeds n={n}")
    if a <= 0 or b <= 0 or tau <= 0:
        raise InvalidInputError("tau, a, b must be positive")
    I_set = set(int(v) for v in I)
    if not all(0 <= v < n for v in I_set):
        raise InvalidInputError("I must be a subset of the row indices")
    high = tau * b / (2.0 * a * r)
    q1: set[frozenset[int]] = set()
    q2: set[frozenset[int]] = set()
    for S in itertools.combinations(range(n), r):
        inside = I_set.intersection(S)
        if not inside:
            continue
        d = _complement_distances_cached(A, S)
        if any(d[j] <= tau for j in inside):
            q1.add(frozenset(S))
        if any(d[j] >= high for j in S if j not in inside):
            q2.add(frozenset(S))
    return q1, q2


def pivot_hypothesis_failure(vectors, a: float, b: float) -> str | None:
    """Describe which pivot hypothesis fails, or ``None`` when both hold.

    Hypotheses (checked up to a relative tolerance of 1e-9): the first
    vector is within ``a`` of the span of the others, and every other
    vector is at distance at least ``b`` from the span of the rest.
    """
    xs = [np.asarray(v, dtype=float) for v in vectors]
    if len(xs) < 2:
        raise InvalidInputError("need at least two vectors")
    dim = xs[0].shape
    if any(x.shape != dim or x.ndim != 1 for x in xs):
        raise InvalidInputError("vectors must share a common dimension")
    if a <= 0 or b <= 0:
        raise InvalidInputError("a and b must be positive")
    d1 = dist_to_span(xs[0], np.array(xs[1:]))
    if d1 > a * (1 + _FLOAT_SLACK) + 1e-12:
        return f"dist(x1, span rest) = {d1:g} exceeds a = {a:g}"
    for idx in range(1, len(xs)):
        others = np.array([x for pos, x in enumerate(xs) if pos != idx])
        d = dist_to_span(xs[idx], others)
        if d < b * (1 - _FLOAT_SLACK) - 1e-12:
            return f"dist(x{idx + 1}, span others) = {d:g} is below b = {b:g}"
    return None


def pivot_index(vectors, a: float, b: float) -> int | None:
    """Index (0-based, >= 1) of a vector whose norm is at least
    ``b / (2 a r)`` times the norm of the first vector.

    The hypotheses of :func:`pivot_hypothesis_failure` are verified
    first; if they fail, returns ``None`` (the failure description is
    available from that helper).  When they hold such an index exists,
    and the smallest one is returned.
    """
    if pivot_hypothesis_failure(vectors, a, b) is not None:
        return None
    xs = [np.asarray(v, dtype=float) for v in vectors]
    r = len(xs)
    threshold = b / (2.0 * a * r) * float(np.linalg.norm(xs[0]))
    for idx in range(1, r):
        if np.linalg.norm(xs[idx]) >= threshold * (1 - 1e-12):
            return idx
    return None


def mindist(B, j: int, k: int) -> float:
    """Smaller of the two full row-to-complement distances of rows ``j``, ``k``."""
    A = as_matrix(B)
    n = A.shape[0]
    if j == k:
        raise InvalidInputError("indices must differ")
    if not (0 <= j < n and 0 <= k < n):
        raise InvalidInputError(f"indices ({j},{k}) out of range for n={n}")
    idx = np.arange(n)
    dj = dist_to_span(A[j], A[idx != j])
    dk = dist_to_span(A[k], A[idx != k])
    return min(dj, dk)


def kmax(T, k: int) -> float:
    """The ``k``-th largest element of a multiset, counting multiplicities."""
    values = sorted((float(v) for v in T), reverse=True)
    if not values:
        raise InvalidInputError("T must be non-empty")
    if not (1 <= k <= len(values)):
        raise InvalidInputError(f"k={k} out of range for |T|={len(values)}")
    return values[k - 1]


@dataclass(frozen=True)
class StructureParams:
    """Parameter bundle for the dyadic event classification.

    ``L`` and ``offset`` follow the fixed formulas
    ``L = 8 (floor(log2 n) + 1 - u) + 2 log2(1 + K1)`` and
    ``offset = 2**(L / 192)``; ``epsilon`` is the constant 1/24 and
    ``K2`` the constant 2000.  ``t`` is the distance threshold the
    dyadic intervals are measured against.
    """

    n: int
    u: int
    K1: float
    t: float
    L: float
    offset: float
    epsilon: float = 1.0 / 24.0
    K2: float = 2000.0


def structure_params(n: int, u: int, K1: float, t: float = 1.0) -> StructureParams:
    """Evaluate the parameter formulas for dimension ``n`` and scale index ``u``."""
    if n < 1:
        raise InvalidInputError("n must be a positive integer")
    if K1 <= 0:
        raise InvalidInputError("K1 must be positive")
    if t <= 0:
        raise InvalidInputError("t must be positive")
    log_floor = int(math.floor(math.log2(n)))
    if not (0 <= u <= log_floor):
        raise InvalidInputError(f"u={u} out of range [0, {log_floor}] for n={n}")
    L = 8.0 * (log_floor + 1 - u) + 2.0 * math.log2(1.0 + K1)
    return StructureParams(n=n, u=u, K1=float(K1), t=float(t), L=L, offset=2.0 ** (L / 192.0))


def _dyadic_index(value: float, t: float, L: float) -> float | int:
    """Map a distance to its dyadic cell index relative to threshold ``t``.

    Integer ``lam`` means ``value in [2**lam * t, 2**(lam+1) * t)``;
    values below ``2**(-L) t`` map to ``-inf`` and values at or above
    ``2**(L+1) t`` map to ``+inf``; integer indices are clamped to
    ``[-floor(L), floor(L)]``.
    """
    if value < 2.0 ** (-L) * t:
        return -math.inf
    if value >= 2.0 ** (L + 1) * t:
        return math.inf
    lam = math.floor(math.log2(value / t))
    # repair floating rounding at cell boundaries
    while 2.0**lam * t > value:
        lam -= 1
    while 2.0 ** (lam + 1) * t <= value:
        lam += 1
    bound = int(math.floor(L))
    return max(-bound, min(bound, lam))


def classify_lambda(A, M, i: int, params: StructureParams, mode: str = "exact"):
    """Dyadic class ``(lam1, lam2)`` of row ``i`` for the pair ``(A, M)``.

    ``lam1`` indexes the dyadic cell of ``dist(row i of A+M, span of the
    other rows)``.  ``lam2`` indexes the cell of the median-rank largest
    ``mindist`` over the residual edge set of the offset comparison
    graph; it is ``-inf`` when that edge set is empty.  Cells are
    closed on the left and open on the right.
    """
    A2 = as_matrix(A)
    M2 = as_matrix(M)
    if A2.shape != M2.shape:
        raise InvalidInputError(f"shape mismatch: A is {A2.shape}, M is {M2.shape}")
    B = A2 + M2
    n = B.shape[0]
    if not (0 <= i < n):
        raise InvalidInputError(f"row index {i} out of range for n={n}")
    idx = np.arange(n)
    d_i = dist_to_span(B[i], B[idx != i])
    lam1 = _dyadic_index(d_i, params.t, params.L)

    depth_L = max(1, math.ceil(params.L - 1e-9))
    g_tilde = build_graph_G_tilde(A2, M2, i, params.offset)
    rho = rho_set(g_tilde, i, depth_L, mode)
    if not rho:
        return lam1, -math.inf
    full = row_distances(B)
    values = [min(full[j], full[k]) for j, k in rho]
    med = kmax(values, math.ceil(len(values) / 2))
    return lam1, _dyadic_index(med, params.t, params.L)
