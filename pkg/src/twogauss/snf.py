"""Smith normal form of integer matrices with exact arbitrary precision.

Row and column operations are tracked in unimodular transforms so that
``U * A * V == S`` holds exactly.  Pivoting always selects a smallest
nonzero entry of the remaining block, which keeps coefficient growth
modest on the small presentations this package produces.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class SNFResult:
    matrix: tuple          # S, diagonal with d1 | d2 | ...
    left: tuple            # U, unimodular (rows x rows)
    right: tuple           # V, unimodular (cols x cols)
    factors: tuple         # positive diagonal entries d1..dr

    @property
    def rank(self):
        return len(self.factors)


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _swap_rows(m, i, j):
    m[i], m[j] = m[j], m[i]


def _swap_cols(m, i, j):
    for row in m:
        row[i], row[j] = row[j], row[i]


def _add_row(m, dst, src, k):
    row_s = m[src]
    row_d = m[dst]
    for idx, v in enumerate(row_s):
        if v:
            row_d[idx] += k * v


def _add_col(m, dst, src, k):
    for row in m:
        if row[src]:
            row[dst] += k * row[src]


def _negate_row(m, i):
    m[i] = [-v for v in m[i]]


def smith_normal_form(matrix):
    """Return the SNFResult of an integer matrix (sequence of rows).

    Empty matrices (zero rows or zero columns) are handled; the factor
    list is then empty and the transforms are identities.
    """
    a = [[int(v) for v in row] for row in matrix]
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    if any(len(row) != ncols for row in a):
        raise ValueError("ragged matrix")
    u = _identity(nrows)
    v = _identity(ncols)

    t = 0
    limit = min(nrows, ncols)
    while t < limit:
        pivot = None
        best = None
        for i in range(t, nrows):
            row = a[i]
            for j in range(t, ncols):
                val = row[j]
                if val and (best is None or abs(val) < best):
                    best = abs(val)
                    pivot = (i, j)
                    if best == 1:
                        break
            if best == 1:
                break
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            _swap_rows(a, t, pi)
            _swap_rows(u, t, pi)
        if pj != t:
            _swap_cols(a, t, pj)
            _swap_cols(v, t, pj)

        while True:
            # clear column t below/above the pivot
            changed = False
            for i in range(nrows):
                if i != t and a[i][t]:
                    q = a[i][t] // a[t][t]
                    if q:
                        _add_row(a, i, t, -q)
                        _add_row(u, i, t, -q)
                    if a[i][t]:
                        # remainder smaller than pivot: swap up and restart
                        _swap_rows(a, t, i)
                        _swap_rows(u, t, i)
                        changed = True
                        break
            if changed:
                continue
            for j in range(ncols):
                if j != t and a[t][j]:
                    q = a[t][j] // a[t][t]
                    if q:
                        _add_col(a, j, t, -q)
                        _add_col(v, j, t, -q)
                    if a[t][j]:
                        _swap_cols(a, t, j)
                        _swap_cols(v, t, j)
                        changed = True
                        break
            if not changed:
                break

        if a[t][t] < 0:
            _negate_row(a, t)
            _negate_row(u, t)
        t += 1

    # enforce the divisibility chain d1 | d2 | ...
    t = 0
    while True:
        fixed = True
        diag = [a[i][i] for i in range(limit)]
        for i in range(len(diag) - 1):
            if diag[i] and diag[i + 1] % diag[i] != 0:
                # fold entry i+1 into column i and rediagonalize the 2x2 block
                _add_col(a, i, i + 1, 1)
                _add_col(v, i, i + 1, 1)
                _rediagonalize(a, u, v, i, nrows, ncols)
                fixed = False
                break
            if diag[i] == 0 and diag[i + 1] != 0:
                _swap_rows(a, i, i + 1)
                _swap_rows(u, i, i + 1)
                _swap_cols(a, i, i + 1)
                _swap_cols(v, i, i + 1)
                fixed = False
                break
        if fixed:
            break

    factors = tuple(a[i][i] for i in range(limit) if a[i][i])
    return SNFResult(
        matrix=tuple(tuple(row) for row in a),
        left=tuple(tuple(row) for row in u),
        right=tuple(tuple(row) for row in v),
        factors=factors,
    )


def _rediagonalize(a, u, v, start, nrows, ncols):
    """Restore diagonal form from position ``start`` after a column fold."""
    t = start
    while t < min(nrows, ncols):
        if all(a[i][t] == 0 for i in range(t, nrows)) and all(
            a[t][j] == 0 for j in range(t, ncols)
        ):
            break
        pivot = None
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j] and (best is None or abs(a[i][j]) < best):
                    best = abs(a[i][j])
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            _swap_rows(a, t, pi)
            _swap_rows(u, t, pi)
        if pj != t:
            _swap_cols(a, t, pj)
            _swap_cols(v, t, pj)
        while True:
            changed = False
            for i in range(nrows):
                if i != t and a[i][t]:
                    q = a[i][t] // a[t][t]
                    if q:
                        _add_row(a, i, t, -q)
                        _add_row(u, i, t, -q)
                    if a[i][t]:
                        _swap_rows(a, t, i)
                        _swap_rows(u, t, i)
                        changed = True
                        break
            if changed:
                continue
            for j in range(ncols):
                if j != t and a[t][j]:
                    q = a[t][j] // a[t][t]
                    if q:
                        _add_col(a, j, t, -q)
                        _add_col(v, j, t, -q)
                    if a[t][j]:
                        _swap_cols(a, t, j)
                        _swap_cols(v, t, j)
                        changed = True
                        break
            if not changed:
                break
        if a[t][t] < 0:
            _negate_row(a, t)
            _negate_row(u, t)
        t += 1


def mat_mul(a, b):
    """Exact integer matrix product of nested sequences."""
    bt = list(zip(*b)) if b else []
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def det_unimodular(m):
    """Determinant via fraction-free Gaussian elimination (Bareiss)."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(map(int, row)) for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def solve_in_row_space(rows, target):
    """Express ``target`` as an integer combination of ``rows``.

    Returns a list of (row index, coefficient) with nonzero coefficients,
    or None when no integer solution exists.  Rows and target are vectors
    of equal length.
    """
    rows = [tuple(int(x) for x in r) for r in rows]
    target = tuple(int(x) for x in target)
    if not rows:
        return [] if all(x == 0 for x in target) else None
    ncols = len(rows[0])
    if len(target) != ncols:
        raise ValueError("target length mismatch")
    # want x with x * M = target, i.e. M^T x = target
    mt = [[rows[i][j] for i in range(len(rows))] for j in range(ncols)]
    res = smith_normal_form(mt)
    r = res.rank
    b = [sum(res.left[i][j] * target[j] for j in range(ncols)) for i in range(ncols)]
    y = []
    for i in range(len(rows)):
        if i < r:
            d = res.factors[i]
            if b[i] % d != 0:
                return None
            y.append(b[i] // d)
        else:
            y.append(0)
    if any(b[i] != 0 for i in range(r, ncols)):
        return None
    x = [sum(res.right[i][j] * y[j] for j in range(len(rows))) for i in range(len(rows))]
    # verify exactly
    for j in range(ncols):
        if sum(x[i] * rows[i][j] for i in range(len(rows))) != target[j]:
            raise AssertionError("row-space solver produced an invalid combination")
    return [(i, c) for i, c in enumerate(x) if c]
