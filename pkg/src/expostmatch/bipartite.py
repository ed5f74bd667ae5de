"""Bipartite maximum matching via augmenting paths (Kuhn's algorithm).

Shared by the Birkhoff decomposition, the robustness tests and the
breakpoint selection for strong decompositions.  Graphs here stay in
the low hundreds of nodes, where this plain implementation is plenty.
"""

from __future__ import annotations


def max_bipartite_matching(adj, n_left, n_right):
    """Maximum matching in a bipartite graph.

    adj[u] lists the right-side neighbours of left node u.  Returns
    (size, match_left, match_right) where match_left[u] is the right
    node matched to u, or -1.
    """
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    size = 0

    # Greedy warm start cuts the number of augmenting searches a lot.
    for u in range(n_left):
        for v in adj[u]:
            if match_r[v] == -1:
                match_l[u] = v
                match_r[v] = u
                size += 1
                break

    def try_augment(u, visited):
        for v in adj[u]:
            if visited[v]:
                continue
            visited[v] = True
            if match_r[v] == -1 or try_augment(match_r[v], visited):
                match_l[u] = v
                match_r[v] = u
                return True
        return False

    for u in range(n_left):
        if match_l[u] != -1:
            continue
        if try_augment(u, [False] * n_right):
            size += 1
    return size, match_l, match_r


def find_perfect_matching(adj, n):
    """Perfect matching on an n+n bipartite graph, or None."""
    size, match_l, _ = max_bipartite_matching(adj, n, n)
    if size != n:
        return None
    return match_l
