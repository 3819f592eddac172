"""Small dense rank computations on sampled values.

Matrices here are at most a dozen rows by five columns, so plain Gaussian
elimination is both adequate and easy to audit.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def rank(rows: Sequence[Sequence], tol: float = 1e-8, exact: bool = False) -> int:
    """Row rank of a small matrix.

    Float mode scales every row to unit max-norm first, then eliminates with
    partial pivoting; an entry at or below ``tol`` is treated as zero. Exact
    mode runs the same elimination in ``Fraction`` arithmetic with no
    tolerance.
    """
    if exact:
        m = [[Fraction(v) for v in r] for r in rows]
        zero = lambda v: v == 0  # noqa: E731
    else:
        m = []
        for r in rows:
            r = [float(v) for v in r]
            top = max((abs(v) for v in r), default=0.0)
            if top > 0:
                m.append([v / top for v in r])
        zero = lambda v: abs(v) <= tol  # noqa: E731
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        piv = max(range(r, len(m)), key=lambda i: abs(m[i][c]))
        if zero(m[piv][c]):
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        for i in range(r + 1, len(m)):
            f = m[i][c] / pv
            if f:
                row_i, row_r = m[i], m[r]
                for j in range(c, ncols):
                    row_i[j] -= f * row_r[j]
        r += 1
    return r


def independent_rows(rows: Sequence[Sequence], tol: float = 1e-8, exact: bool = False) -> list[int]:
    """Indices of a greedy maximal independent subset, scanning in order."""
    keep: list[int] = []
    current = 0
    for i in range(len(rows)):
        trial = rank([rows[k] for k in keep] + [rows[i]], tol, exact)
        if trial > current:
            keep.append(i)
            current = trial
    return keep
