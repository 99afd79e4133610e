"""Second-stage allocation: ship inventory to realized demand at margin ``p - C``.

The inequality-constrained transportation LP

    g(I, p, D) = min sum_ij (C_ij - p) X_ij
                 s.t. sum_i X_ij <= D_j,  sum_j X_ij <= I_i,  X >= 0

is balanced by one disposal row (supply ``sum D``, absorbs unmet demand) and one
disposal column (demand ``sum I``, absorbs unused inventory), then solved by the
transportation (network) simplex with Bland's rule.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-12
_MAX_PIVOTS = 100_000


@dataclass(frozen=True, eq=False)
class AllocationResult:
    X: np.ndarray
    objective: float
    lam: np.ndarray
    eta: np.ndarray
    pivots: int = 0

    @property
    def duals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lam, self.eta

    def dual_objective(self, I, D) -> float:
        return float(-self.lam @ np.asarray(I, float) - self.eta @ np.asarray(D, float))


def _northwest_corner(supply, demand):
    R, K = len(supply), len(demand)
    s, d = supply.copy(), demand.copy()
    flow = np.zeros((R, K))
    basis = []
    i = j = 0
    while True:
        q = min(s[i], d[j])
        flow[i, j] = q
        basis.append((i, j))
        if s[i] <= d[j]:
            d[j] -= q
            s[i] = 0.0
        else:
            s[i] -= q
            d[j] = 0.0
        if i == R - 1 and j == K - 1:
            break
        # exactly one move per cell keeps the basis a spanning tree of R + K - 1 cells
        if i == R - 1:
            j += 1
        elif j == K - 1:
            i += 1
        elif s[i] == 0.0:
            i += 1
        else:
            j += 1
    return flow, basis


def _potentials(cost, basis, R, K):
    adj = [[] for _ in range(R + K)]
    for i, j in basis:
        adj[i].append(R + j)
        adj[R + j].append(i)
    pot = np.full(R + K, np.nan)
    pot[0] = 0.0
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nxt in adj[node]:
            if np.isnan(pot[nxt]):
                if node < R:  # row -> column: u_i + v_j = c_ij
                    pot[nxt] = cost[node, nxt - R] - pot[node]
                else:
                    pot[nxt] = cost[nxt, node - R] - pot[node]
                queue.append(nxt)
    return pot[:R], pot[R:], adj


def _tree_path(adj, start, goal):
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in adj[node]:
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path


def solve_allocation(I, D, p: float, C) -> AllocationResult:
    """Optimal vertex allocation with dual certificates ``(lam, eta) >= 0``."""
    I = np.asarray(I, dtype=float)
    D = np.asarray(D, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    m, n = C.shape
    if I.shape != (m,) or D.shape != (n,):
        raise ValueError(f"shape mismatch: C {C.shape}, I {I.shape}, D {D.shape}")

    R, K = m + 1, n + 1
    supply = np.append(I, D.sum())
    demand = np.append(D, I.sum())
    cost = np.zeros((R, K))
    cost[:m, :n] = C - p

    flow, basis = _northwest_corner(supply, demand)
    in_basis = set(basis)
    pivots = 0
    while True:
        u, v, adj = _potentials(cost, basis, R, K)
        reduced = cost - u[:, None] - v[None, :]
        entering = None
        for i in range(R):  # Bland: lowest-index improving cell
            for j in range(K):
                if (i, j) not in in_basis and reduced[i, j] < -_PIVOT_TOL:
                    entering = (i, j)
                    break
            if entering is not None:
                break
        if entering is None:
            break
        pivots += 1
        if pivots > _MAX_PIVOTS:
            raise RuntimeError("transportation simplex failed to terminate")

        ei, ej = entering
        nodes = _tree_path(adj, ei, R + ej)  # column ej ... row ei
        cells = []
        for a, b in zip(nodes, nodes[1:]):
            cells.append((a, b - R) if a < R else (b, a - R))
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(flow[c] for c in minus)
        leaving = min(c for c in minus if flow[c] <= theta)  # Bland tie-break
        for c in minus:
            flow[c] -= theta
        for c in plus:
            flow[c] += theta
        flow[ei, ej] = theta
        flow[leaving] = 0.0
        basis.remove(leaving)
        in_basis.discard(leaving)
        basis.append(entering)
        in_basis.add(entering)

    u, v, _ = _potentials(cost, basis, R, K)
    lam = np.maximum(-(u[:m] + v[n]), 0.0)
    eta = np.maximum(-(u[m] + v[:n]), 0.0)
    X = np.maximum(flow[:m, :n], 0.0)
    objective = float(np.sum((C - p) * X))
    return AllocationResult(X=X, objective=objective, lam=lam, eta=eta, pivots=pivots)


def extract_duals(result: AllocationResult) -> tuple[np.ndarray, np.ndarray]:
    return result.lam.copy(), result.eta.copy()


def allocation_value(I, D, p: float, C) -> float:
    return solve_allocation(I, D, p, C).objective


# -- brute-force oracle ----------------------------------------------------


@lru_cache(maxsize=None)
def _vertex_bases(m: int, n: int):
    """Inverses of every nonsingular basis of the slack-augmented constraint matrix."""
    rows = m + n
    A = np.zeros((rows, m * n + m + n))
    for i in range(m):
        for j in range(n):
            col = i * n + j
            A[i, col] = 1.0
            A[m + j, col] = 1.0
    A[:, m * n:] = np.eye(rows)
    combos = np.array(list(itertools.combinations(range(A.shape[1]), rows)))
    mats = np.transpose(A[:, combos], (1, 0, 2))
    keep = np.abs(np.linalg.det(mats)) > 0.5  # entries are 0/1, dets are integers
    return combos[keep], np.linalg.inv(mats[keep])


def brute_force_allocation(I, D, p: float, C) -> float:
    """Exhaustive minimum over basic feasible solutions; only for ``m * n <= 9``."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    m, n = C.shape
    if m * n > 9:
        raise ValueError(f"brute force limited to m*n <= 9, got {m}x{n}")
    rhs = np.concatenate([np.asarray(I, float), np.asarray(D, float)])
    combos, inverses = _vertex_bases(m, n)
    x_basic = inverses @ rhs
    feasible = np.all(x_basic >= -1e-12, axis=1)
    costs = np.concatenate([(C - p).ravel(), np.zeros(m + n)])
    values = np.sum(costs[combos] * x_basic, axis=1)
    return float(values[feasible].min())
