"""Simple undirected 0/1 networks, permutations and isomorphism checks.

Vertices are numbered from 1 in every text format, permutation and error
message; the adjacency array itself is 0-based.
"""
from dataclasses import dataclass
import itertools
import math

import numpy as np

#: Largest vertex count accepted by the factorial isomorphism search.
MAX_SEARCH_N = 8


class NetworkParseError(ValueError):
    """Malformed network text. ``line`` is 1-based, or None if not line-specific."""

    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class SearchBoundError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Network:
    n: int
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=np.int8)
        if self.n < 1 or a.shape != (self.n, self.n):
            raise ValueError(f"adjacency must be {self.n}x{self.n}, got {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(np.diag(a)):
            raise ValueError("adjacency diagonal must be zero (no self-loops)")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash((self.n, self.adjacency.tobytes()))

    def __repr__(self):
        return f"Network(n={self.n}, edges={self.edges()})"

    @classmethod
    def from_edges(cls, n, edges):
        """Build from 1-based vertex pairs. Duplicates collapse."""
        a = np.zeros((n, n), dtype=np.int8)
        for i, j in edges:
            if not (1 <= i <= n and 1 <= j <= n):
                raise ValueError(f"edge ({i}, {j}) out of range 1..{n}")
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            a[i - 1, j - 1] = a[j - 1, i - 1] = 1
        return cls(n, a)

    @classmethod
    def empty(cls, n):
        return cls(n, np.zeros((n, n), dtype=np.int8))

    def edges(self):
        """Sorted list of 1-based (i, j) pairs with i < j."""
        ii, jj = np.nonzero(np.triu(self.adjacency))
        return [(int(i) + 1, int(j) + 1) for i, j in zip(ii, jj)]

    @property
    def n_edges(self):
        return int(self.adjacency.sum()) // 2


@dataclass(frozen=True)
class Permutation:
    """Bijection on {1..n}: vertex ``i`` is sent to ``mapping[i-1]``."""

    mapping: tuple

    def __post_init__(self):
        m = tuple(int(x) for x in self.mapping)
        if sorted(m) != list(range(1, len(m) + 1)):
            raise ValueError(f"not a permutation of 1..{len(m)}: {m}")
        object.__setattr__(self, "mapping", m)

    def __len__(self):
        return len(self.mapping)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(1, n + 1)))

    def inverse(self):
        inv = [0] * len(self)
        for i, pi in enumerate(self.mapping, start=1):
            inv[pi - 1] = i
        return Permutation(tuple(inv))

    def then(self, other):
        """Composition: apply ``self`` first, then ``other``."""
        if len(other) != len(self):
            raise ValueError("permutation length mismatch")
        return Permutation(tuple(other.mapping[pi - 1] for pi in self.mapping))

    def matrix(self):
        """Permutation matrix P with P[p(i), i] = 1, so (P A P^t)[p(i), p(j)] = A[i, j]."""
        n = len(self)
        p = np.zeros((n, n), dtype=np.int8)
        p[np.array(self.mapping) - 1, np.arange(n)] = 1
        return p

    def apply(self, theta):
        """Relabel per-vertex values: result[p(i)] = theta[i]."""
        theta = np.asarray(theta)
        out = np.empty_like(theta)
        out[np.array(self.mapping) - 1] = theta
        return out


# ---------------------------------------------------------------------------
# parsing


def _strip_comment(line):
    return line.split("#", 1)[0].strip()


def _int_tokens(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise NetworkParseError(f"expected integers, got {' '.join(tokens)!r}", lineno) from None


def parse_network(text, format="edge-list"):
    """Parse a network from edge-list or adjacency-matrix text.

    Edge-list: the first non-comment token is ``n``; every following
    non-comment line holds a pair ``i j`` with 1 <= i, j <= n and i != j.
    Adjacency-matrix: first line ``n``, then ``n`` rows of ``n`` 0/1 values,
    symmetric with zero diagonal. ``#`` comments out the rest of a line in
    both formats.
    """
    lines = [(k, _strip_comment(raw)) for k, raw in enumerate(text.splitlines(), start=1)]
    lines = [(k, s) for k, s in lines if s]
    if not lines:
        raise NetworkParseError("missing vertex count")
    first_no, first = lines[0]
    head = first.split()
    n = _int_tokens(head[:1], first_no)[0]
    if n < 1:
        raise NetworkParseError(f"vertex count must be positive, got {n}", first_no)

    if format == "edge-list":
        # tokens after n on the first line are treated as a pair too
        body = ([(first_no, head[1:])] if len(head) > 1 else []) + [
            (k, s.split()) for k, s in lines[1:]
        ]
        a = np.zeros((n, n), dtype=np.int8)
        for k, toks in body:
            if len(toks) != 2:
                raise NetworkParseError(f"expected 'i j', got {' '.join(toks)!r}", k)
            i, j = _int_tokens(toks, k)
            if not (1 <= i <= n and 1 <= j <= n):
                raise NetworkParseError(f"vertex index out of range 1..{n}: {i} {j}", k)
            if i == j:
                raise NetworkParseError(f"self-loop at vertex {i}", k)
            a[i - 1, j - 1] = a[j - 1, i - 1] = 1
        return Network(n, a)

    if format == "adjacency-matrix":
        if len(head) != 1:
            raise NetworkParseError("first line must hold only n", first_no)
        rows = lines[1:]
        if len(rows) != n:
            raise NetworkParseError(f"expected {n} matrix rows, got {len(rows)}")
        a = np.zeros((n, n), dtype=np.int8)
        for r, (k, s) in enumerate(rows):
            vals = _int_tokens(s.split(), k)
            if len(vals) != n:
                raise NetworkParseError(f"expected {n} values, got {len(vals)}", k)
            if any(v not in (0, 1) for v in vals):
                raise NetworkParseError("entries must be 0 or 1", k)
            if vals[r]:
                raise NetworkParseError(f"self-loop at vertex {r + 1}", k)
            a[r] = vals
        bad = np.argwhere(a != a.T)
        if len(bad):
            i, j = bad[0]
            raise NetworkParseError(f"asymmetric adjacency at ({i + 1}, {j + 1})", rows[i][0])
        return Network(n, a)

    raise ValueError(f"unknown network format {format!r}")


def to_edge_list(net):
    lines = [str(net.n)] + [f"{i} {j}" for i, j in net.edges()]
    return "\n".join(lines) + "\n"


def to_adjacency_matrix(net):
    rows = [" ".join(str(int(v)) for v in row) for row in net.adjacency]
    return "\n".join([str(net.n)] + rows) + "\n"


# ---------------------------------------------------------------------------
# generators and permutation actions


def clique_network(n, m):
    """Clique on vertices 1..m, vertices m+1..n isolated (an (m-1)-simplex)."""
    if not 1 <= m <= n:
        raise ValueError(f"clique size must be in 1..{n}, got {m}")
    a = np.zeros((n, n), dtype=np.int8)
    a[:m, :m] = 1
    np.fill_diagonal(a, 0)
    return Network(n, a)


def permute_network(net, p):
    if len(p) != net.n:
        raise ValueError(f"permutation of length {len(p)} for a network on {net.n} vertices")
    pm = p.matrix()
    return Network(net.n, pm @ net.adjacency @ pm.T)


def verify_isomorphism(a, b, p):
    if not (a.n == b.n == len(p)):
        raise ValueError(f"size mismatch: {a.n}, {b.n}, permutation {len(p)}")
    return permute_network(a, p) == b


def find_isomorphism_bruteforce(a, b):
    """Exhaustive search over all n! relabelings; n is capped at 8.

    Returns a Permutation ``p`` with ``verify_isomorphism(a, b, p)`` or None.
    """
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    if a.n > MAX_SEARCH_N:
        raise SearchBoundError(
            f"isomorphism search is limited to n <= {MAX_SEARCH_N} ({math.factorial(a.n)} candidates for n={a.n})"
        )
    if a.n_edges != b.n_edges:
        return None
    if sorted(a.adjacency.sum(0)) != sorted(b.adjacency.sum(0)):
        return None
    A = a.adjacency
    B = b.adjacency
    for perm in itertools.permutations(range(a.n)):
        idx = np.array(perm)
        # perm[i] is the image of vertex i: B[perm[i], perm[j]] == A[i, j]
        if np.array_equal(B[np.ix_(idx, idx)], A):
            return Permutation(tuple(x + 1 for x in perm))
    return None
