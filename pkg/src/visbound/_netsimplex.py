"""Primal network simplex for balanced transportation problems on a sparse
arc list.

Rows are supply nodes 0..nr-1, columns are demand nodes nr..nr+nc-1 and an
extra root node closes the basis tree through big-M artificial arcs, encoded
as negative arc ids (-1 - node).  The tree is kept strongly feasible (every
zero-flow tree arc points toward the root) and the leaving arc is chosen by
Cunningham's rule, so degenerate pivots cannot cycle.

Each pivot touches only the cycle and the subtree that gets re-hung.  Flows
and potentials are re-derived from scratch whenever a solve starts, so
rounding drift cannot accumulate across calls.
"""

import numpy as np
from numba import njit

STATUS_OPTIMAL = 0
STATUS_ITERATION_LIMIT = 1
STATUS_BAD_TREE = 2
STATUS_INFEASIBLE_START = 3


@njit(cache=True)
def tree_state(n_nodes, tail, head, tree_arc, arc_cost, big_m, supply,
               order, parent, pred, depth, pi, flow):
    """Fill parent/depth/potentials/flows of the tree.  Returns False if the
    arcs do not form a spanning tree."""
    root = n_nodes - 1
    n_tree = n_nodes - 1
    start = np.zeros(n_nodes + 1, np.int64)
    adj = np.empty(2 * n_tree, np.int64)
    for t in range(n_tree):
        start[tail[t] + 1] += 1
        start[head[t] + 1] += 1
    for v in range(n_nodes):
        start[v + 1] += start[v]
    fill = start[:n_nodes].copy()
    for t in range(n_tree):
        adj[fill[tail[t]]] = t
        fill[tail[t]] += 1
        adj[fill[head[t]]] = t
        fill[head[t]] += 1

    for v in range(n_nodes):
        parent[v] = -2
    order[0] = root
    parent[root] = -1
    pred[root] = -1
    depth[root] = 0
    pi[root] = 0.0
    qh = 0
    qt = 1
    while qh < qt:
        u = order[qh]
        qh += 1
        for k in range(start[u], start[u + 1]):
            t = adj[k]
            if t == pred[u]:
                continue
            w = head[t] if tail[t] == u else tail[t]
            if parent[w] != -2:
                return False
            parent[w] = u
            pred[w] = t
            depth[w] = depth[u] + 1
            a = tree_arc[t]
            c = arc_cost[a] if a >= 0 else big_m
            if tail[t] == u:
                pi[w] = pi[u] + c
            else:
                pi[w] = pi[u] - c
            order[qt] = w
            qt += 1
    if qt != n_nodes:
        return False

    sub = supply.copy()
    for k in range(n_nodes - 1, 0, -1):
        w = order[k]
        t = pred[w]
        if tail[t] == w:
            flow[t] = sub[w]
        else:
            flow[t] = -sub[w]
        sub[parent[w]] += sub[w]
    return True


@njit(cache=True)
def _link(v, p, first, nxt, prv):
    nxt[v] = first[p]
    prv[v] = -1
    if first[p] >= 0:
        prv[first[p]] = v
    first[p] = v


@njit(cache=True)
def _unlink(v, p, first, nxt, prv):
    if prv[v] >= 0:
        nxt[prv[v]] = nxt[v]
    else:
        first[p] = nxt[v]
    if nxt[v] >= 0:
        prv[nxt[v]] = prv[v]


@njit(cache=True)
def solve_tree(nr, nc, arc_row, arc_col, arc_cost, supply, tail, head, tree_arc,
               big_m, max_iter, rc_tol, tie_tol, flow_tol):
    """Optimise over the arc list starting from a strongly feasible tree.

    tail/head/tree_arc describe the nr+nc tree arcs and are updated in place.
    Returns (status, iterations, flow, pi) with reduced costs
    c + pi[row] - pi[col].  Pivots update flows along the cycle and shift the
    potentials of the re-hung subtree; the caller re-derives exact values
    from the final tree.
    """
    n_nodes = nr + nc + 1
    n_tree = n_nodes - 1
    n_arcs = arc_row.size
    block = max(64, int(np.sqrt(n_arcs)))

    order = np.zeros(n_nodes, np.int64)
    parent = np.zeros(n_nodes, np.int64)
    pred = np.zeros(n_nodes, np.int64)
    depth = np.zeros(n_nodes, np.int64)
    pi = np.zeros(n_nodes)
    flow = np.zeros(n_tree)
    up_p = np.zeros(n_nodes, np.int64)
    up_q = np.zeros(n_nodes, np.int64)
    stack = np.zeros(n_nodes, np.int64)
    first = np.full(n_nodes, -1, np.int64)
    nxt = np.full(n_nodes, -1, np.int64)
    prv = np.full(n_nodes, -1, np.int64)

    if not tree_state(n_nodes, tail, head, tree_arc, arc_cost, big_m, supply,
                      order, parent, pred, depth, pi, flow):
        return STATUS_BAD_TREE, 0, flow, pi
    for t in range(n_tree):
        if flow[t] < -flow_tol:
            return STATUS_INFEASIBLE_START, 0, flow, pi
        if flow[t] <= flow_tol and parent[tail[t]] != head[t]:
            return STATUS_INFEASIBLE_START, 0, flow, pi
    for v in range(n_nodes):
        if parent[v] >= 0:
            _link(v, parent[v], first, nxt, prv)

    it = 0
    e_next = 0
    while True:
        best = -rc_tol
        enter = -1
        e = e_next
        cnt = 0
        for _ in range(n_arcs):
            r = arc_cost[e] + pi[arc_row[e]] - pi[nr + arc_col[e]]
            if r < best:
                best = r
                enter = e
            e += 1
            if e == n_arcs:
                e = 0
            cnt += 1
            if cnt == block:
                if enter >= 0:
                    break
                cnt = 0
        e_next = e
        if enter < 0:
            break
        if it >= max_iter:
            return STATUS_ITERATION_LIMIT, it, flow, pi

        p = arc_row[enter]
        q = nr + arc_col[enter]
        a = p
        b = q
        np_ = 0
        nq = 0
        while a != b:
            if depth[a] >= depth[b]:
                up_p[np_] = a
                np_ += 1
                a = parent[a]
            else:
                up_q[nq] = b
                nq += 1
                b = parent[b]

        # cycle runs apex -> p -> q -> apex; blocking arcs oppose that direction
        delta = np.inf
        for k in range(np_):
            t = pred[up_p[k]]
            if tail[t] == up_p[k]:
                delta = min(delta, max(flow[t], 0.0))
        for k in range(nq):
            t = pred[up_q[k]]
            if head[t] == up_q[k]:
                delta = min(delta, max(flow[t], 0.0))
        if delta == np.inf:
            return STATUS_BAD_TREE, it, flow, pi
        # last blocking arc met when walking the cycle from the apex
        leave = -1
        u_out = -1
        for k in range(nq - 1, -1, -1):
            t = pred[up_q[k]]
            if head[t] == up_q[k] and max(flow[t], 0.0) <= delta + tie_tol:
                leave = t
                u_out = up_q[k]
                break
        on_p = False
        if leave < 0:
            for k in range(np_):
                t = pred[up_p[k]]
                if tail[t] == up_p[k] and max(flow[t], 0.0) <= delta + tie_tol:
                    leave = t
                    u_out = up_p[k]
                    on_p = True
                    break

        if delta > 0.0:
            for k in range(np_):
                t = pred[up_p[k]]
                if tail[t] == up_p[k]:
                    flow[t] -= delta
                else:
                    flow[t] += delta
            for k in range(nq):
                t = pred[up_q[k]]
                if tail[t] == up_q[k]:
                    flow[t] += delta
                else:
                    flow[t] -= delta

        rc_in = best
        tail[leave] = p
        head[leave] = q
        tree_arc[leave] = enter
        flow[leave] = delta
        if on_p:
            x_in = p
            y_in = q
            shift = -rc_in
        else:
            x_in = q
            y_in = p
            shift = rc_in

        # re-hang the path x_in .. u_out below y_in
        prev_node = y_in
        prev_arc = leave
        x = x_in
        while True:
            old_par = parent[x]
            old_pred = pred[x]
            _unlink(x, old_par, first, nxt, prv)
            parent[x] = prev_node
            pred[x] = prev_arc
            _link(x, prev_node, first, nxt, prv)
            if x == u_out:
                break
            prev_node = x
            prev_arc = old_pred
            x = old_par

        top = 0
        stack[0] = x_in
        top = 1
        while top > 0:
            top -= 1
            v = stack[top]
            pi[v] += shift
            depth[v] = depth[parent[v]] + 1
            c = first[v]
            while c >= 0:
                stack[top] = c
                top += 1
                c = nxt[c]
        it += 1

    return STATUS_OPTIMAL, it, flow, pi


@njit(cache=True)
def evaluate_tree(nr, nc, arc_cost, supply, tail, head, tree_arc, big_m):
    """Potentials and flows of a fixed tree for the given supplies."""
    n_nodes = nr + nc + 1
    order = np.zeros(n_nodes, np.int64)
    parent = np.zeros(n_nodes, np.int64)
    pred = np.zeros(n_nodes, np.int64)
    depth = np.zeros(n_nodes, np.int64)
    pi = np.zeros(n_nodes)
    flow = np.zeros(n_nodes - 1)
    ok = tree_state(n_nodes, tail, head, tree_arc, arc_cost, big_m, supply,
                    order, parent, pred, depth, pi, flow)
    return ok, flow, pi


@njit(cache=True)
def negative_cells(cost, pi, nr, nc, tol):
    """Flat ids and reduced costs of all cells priced below -tol."""
    count = 0
    for i in range(nr):
        for j in range(nc):
            if cost[i, j] + pi[i] - pi[nr + j] < -tol:
                count += 1
    ids = np.empty(count, np.int64)
    vals = np.empty(count)
    k = 0
    for i in range(nr):
        for j in range(nc):
            r = cost[i, j] + pi[i] - pi[nr + j]
            if r < -tol:
                ids[k] = i * nc + j
                vals[k] = r
                k += 1
    return ids, vals


def artificial_tree(nr, nc, col_mass):
    """All-artificial starting tree: each node hangs off the root.

    Rows and empty columns point at the root, columns with demand are fed
    from it, so every zero-flow arc is directed toward the root.
    """
    root = nr + nc
    nodes = np.arange(nr + nc, dtype=np.int64)
    tail = nodes.copy()
    head = np.full(nr + nc, root, dtype=np.int64)
    down = np.zeros(nr + nc, dtype=bool)
    down[nr:] = np.asarray(col_mass) > 0
    tail[down] = root
    head[down] = nodes[down]
    return tail, head, -1 - nodes


def northwest_cells(row_mass, col_mass):
    """Cells of the north-west corner staircase and the node where it ends.

    On a tie the staircase steps right; hanging the root off the final node
    then leaves every degenerate arc pointing toward the root.
    """
    ra = np.array(row_mass, dtype=float)
    cb = np.array(col_mass, dtype=float)
    nr = ra.size
    nc = cb.size
    cells = []
    i = j = 0
    end = nr + nc - 1
    while True:
        cells.append((i, j))
        m = min(ra[i], cb[j])
        ra[i] -= m
        cb[j] -= m
        if i == nr - 1 and j == nc - 1:
            break
        if j == nc - 1 or (i < nr - 1 and cb[j] > ra[i]):
            i += 1
            end = i
        else:
            j += 1
            end = nr + j
    return cells, end
