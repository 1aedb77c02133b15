"""Pure-Python reference kernels; used when the Cython extension is unavailable.

Both functions mirror ``_kernels.pyx`` statement for statement so that the two
backends return identical assignments, including tie-breaking.
"""
import math

INF = math.inf


def solve_assignment(cost):
    """Minimum-cost assignment on a rectangular matrix with ``inf`` as forbidden.

    ``cost`` is an (n, m) array-like. Returns a list ``row_to_col`` of length n
    with -1 for rows left unassigned. Among matchings of maximum cardinality
    over finite entries, the returned one has minimum total cost.
    """
    rows = [list(map(float, r)) for r in cost]
    n = len(rows)
    m = len(rows[0]) if n else 0
    if n == 0 or m == 0:
        return [-1] * n
    transposed = n > m
    if transposed:
        rows = [list(col) for col in zip(*rows)]
        n, m = m, n
    col_of_row = _shortest_augmenting_path(rows, n, m)
    if not transposed:
        return col_of_row
    out = [-1] * m
    for i, j in enumerate(col_of_row):
        if j >= 0:
            out[j] = i
    return out


def _shortest_augmenting_path(c, n, m):
    # 1-indexed potentials; column 0 is the virtual source
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (m + 1)
        used = [False] * (m + 1)
        found = True
        while True:
            used[j0] = True
            i0 = p[j0]
            row = c[i0 - 1]
            delta = INF
            j1 = -1
            ui = u[i0]
            for j in range(1, m + 1):
                if not used[j]:
                    cij = row[j - 1]
                    if cij != INF:
                        cur = cij - ui - v[j]
                        if cur < minv[j]:
                            minv[j] = cur
                            way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            if j1 < 0:
                found = False
                break
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        if not found:
            continue
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row


def overlap(a0, aw, b0, bw):
    """Length of the intersection of [a0, a0+aw] and [b0, b0+bw]; negative when disjoint."""
    # contained intervals return their own width, so identical boxes give exactly 1
    if b0 <= a0 and a0 + aw <= b0 + bw:
        return aw
    if a0 <= b0 and b0 + bw <= a0 + aw:
        return bw
    return min(a0 + aw, b0 + bw) - max(a0, b0)


def iou_matrix(a, b):
    """Pairwise IoU between (n, 4) and (m, 4) arrays of (x, y, w, h) boxes."""
    a = [tuple(map(float, r)) for r in a]
    b = [tuple(map(float, r)) for r in b]
    out = []
    for ax, ay, aw, ah in a:
        row = []
        for bx, by, bw, bh in b:
            iw = overlap(ax, aw, bx, bw)
            ih = overlap(ay, ah, by, bh)
            if iw <= 0 or ih <= 0:
                row.append(0.0)
                continue
            inter = iw * ih
            row.append(inter / (aw * ah + bw * bh - inter))
        out.append(row)
    return out
