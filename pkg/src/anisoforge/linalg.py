"""Division-free determinants and rank over F_p."""

from __future__ import annotations


def berkowitz_charpoly(A, zero, one, reduce=None):
    """Characteristic polynomial det(xI - A), highest degree first.

    Uses only ring addition, subtraction and multiplication, so it works over
    Z/p^N and over polynomial rings alike. ``reduce`` is applied to every
    freshly computed entry to keep representatives small.
    """
    red = reduce or (lambda v: v)
    n = len(A)
    poly = [one]
    for r in range(n):
        # A_r = [[M, s], [row, a]] with M the leading r x r block.
        a = A[r][r]
        s = [A[i][r] for i in range(r)]
        row = [A[r][j] for j in range(r)]
        column = [one, red(zero - a)]
        vec = s
        for _ in range(r):
            column.append(red(zero - _dot(row, vec, zero)))
            vec = [
                red(_dot((A[i][j] for j in range(r)), vec, zero))
                for i in range(r)
            ]
        # lower-triangular Toeplitz (r+2) x (r+1) applied to poly
        new = []
        for i in range(r + 2):
            acc = zero
            for j in range(max(0, i - len(column) + 1), min(i, r) + 1):
                acc = acc + column[i - j] * poly[j]
            new.append(red(acc))
        poly = new
    return poly


def _dot(xs, ys, zero):
    acc = zero
    for x, y in zip(xs, ys):
        acc = acc + x * y
    return acc


def berkowitz_det(A, zero, one, reduce=None):
    n = len(A)
    if n == 0:
        return one
    c = berkowitz_charpoly(A, zero, one, reduce)[-1]
    return c if n % 2 == 0 else (reduce or (lambda v: v))(zero - c)


def rank_mod_p(rows, p: int) -> int:
    """Rank of an integer matrix over F_p by Gaussian elimination."""
    m = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [x * inv % p for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                factor = m[i][col]
                m[i] = [(x - factor * y) % p for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank
