"""
Exact rational linear algebra: feasibility of {x >= 0 : Ax = b}, rank and
the convex-hull / dominance queries built on top of them.

All arithmetic is done on Fractions; there is no tolerance anywhere.
"""
import logging
from fractions import Fraction

logger = logging.getLogger(__name__)


def find_feasible_point(rows, rhs):
    """
    Find x >= 0 with rows @ x == rhs using a phase-one simplex with Bland's rule.

    Args:
        rows (list): m lists of n rationals.
        rhs (list): m rationals.

    Returns:
        list or None: A feasible point (n Fractions), or None if the system is infeasible.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    if m == 0:
        return [Fraction(0)] * n

    width = n + m + 1
    tableau = []
    for i, (row, b) in enumerate(zip(rows, rhs)):
        sign = -1 if b < 0 else 1
        line = [Fraction(sign * v) for v in row]
        line.extend(Fraction(1) if k == i else Fraction(0) for k in range(m))
        line.append(Fraction(sign * b))
        tableau.append(line)

    basis = [n + i for i in range(m)]
    # reduced costs of the phase-one objective (sum of artificials)
    cost = [sum(tableau[i][j] for i in range(m)) if j < n else Fraction(0) for j in range(width - 1)]
    cost.append(sum(tableau[i][-1] for i in range(m)))

    while True:
        entering = next((j for j in range(n) if cost[j] > 0), None)
        if entering is None:
            break

        leaving = None
        best = None
        for i in range(m):
            coef = tableau[i][entering]
            if coef > 0:
                ratio = tableau[i][-1] / coef
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    best = ratio
                    leaving = i
        if leaving is None:
            # unbounded direction in phase one cannot lower the objective below zero
            break

        _pivot(tableau, cost, leaving, entering)
        basis[leaving] = entering

    if cost[-1] != 0:
        return None

    point = [Fraction(0)] * n
    for i, var in enumerate(basis):
        if var < n:
            point[var] = tableau[i][-1]
    return point


def _pivot(tableau, cost, row_index, col_index):
    pivot_row = tableau[row_index]
    factor = pivot_row[col_index]
    pivot_row[:] = [v / factor for v in pivot_row]
    for i, row in enumerate(tableau):
        if i != row_index and row[col_index] != 0:
            scale = row[col_index]
            row[:] = [a - scale * b for a, b in zip(row, pivot_row)]
    if cost[col_index] != 0:
        scale = cost[col_index]
        cost[:] = [a - scale * b for a, b in zip(cost, pivot_row)]


def rank(matrix):
    """
    Rank of a rational matrix by exact Gaussian elimination.

    Args:
        matrix (list): List of rows.

    Returns:
        int: The rank.
    """
    rows = [[Fraction(v) for v in row] for row in matrix]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][col]
        for i in range(r + 1, len(rows)):
            if rows[i][col] != 0:
                scale = rows[i][col] / lead
                rows[i] = [a - scale * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def nullspace_dimension(matrix, ncols):
    """Dimension of {x : matrix @ x = 0} for a matrix with ncols columns."""
    if not matrix:
        return ncols
    return ncols - rank(matrix)


def affine_rank(points):
    """Dimension of the affine hull of a nonempty list of rational points."""
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    return rank(diffs) if diffs else 0


def in_convex_hull(point, points):
    """
    Decide whether point lies in conv(points).

    Args:
        point (sequence): Query point.
        points (list): Candidate generators (nonempty).

    Returns:
        bool: True if point is a convex combination of points.
    """
    if not points:
        return False
    if any(tuple(p) == tuple(point) for p in points):
        return True
    dim = len(point)
    rows = [[p[k] for p in points] for k in range(dim)]
    rows.append([Fraction(1)] * len(points))
    rhs = list(point) + [Fraction(1)]
    return find_feasible_point(rows, rhs) is not None


def exists_dominating(point, points):
    """Is there b in conv(points) with point <= b componentwise?"""
    if any(all(a <= b for a, b in zip(point, p)) for p in points):
        return True
    dim = len(point)
    count = len(points)
    # sum_j lambda_j p_j - s = point, sum lambda = 1, lambda, s >= 0
    rows = []
    for k in range(dim):
        row = [p[k] for p in points] + [Fraction(-1) if i == k else Fraction(0) for i in range(dim)]
        rows.append(row)
    rows.append([Fraction(1)] * count + [Fraction(0)] * dim)
    return find_feasible_point(rows, list(point) + [Fraction(1)]) is not None


def exists_dominated(point, points):
    """Is there a in conv(points) with a <= point componentwise?"""
    if any(all(b <= a for a, b in zip(point, p)) for p in points):
        return True
    dim = len(point)
    count = len(points)
    rows = []
    for k in range(dim):
        row = [p[k] for p in points] + [Fraction(1) if i == k else Fraction(0) for i in range(dim)]
        rows.append(row)
    rows.append([Fraction(1)] * count + [Fraction(0)] * dim)
    return find_feasible_point(rows, list(point) + [Fraction(1)]) is not None
