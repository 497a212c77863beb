"""Pure-Python fraction-free pivoting kernel.

Tableau rows are lists of Python ints.  A row stands for an equation, so
any positive rescaling leaves it unchanged; ``dens[k]`` carries the scale of
rows whose absolute value matters (objective rows) and is 0 for plain
constraint rows (``gcd(x, 0) == x`` keeps the reduction uniform).
"""

from math import gcd


def normalize(row, d=0):
    """Divide a row (and its scale ``d``) by the gcd of all entries."""
    g = gcd(*row, d)
    if g > 1:
        row = [a // g for a in row]
        d //= g
    return row, d


def pivot(tab, dens, r, c):
    """Eliminate column ``c`` from every row but ``r`` (pivot entry must be > 0)."""
    prow = tab[r]
    p = prow[c]
    if p <= 0:
        raise ValueError("pivot entry must be positive")
    prow, _ = normalize(prow)
    tab[r] = prow
    p = prow[c]
    nz = [j for j, b in enumerate(prow) if b]
    for k in range(len(tab)):
        if k == r:
            continue
        row = tab[k]
        f = row[c]
        if not f:
            continue
        new = [a * p for a in row] if p != 1 else list(row)
        for j in nz:
            new[j] -= f * prow[j]
        d = dens[k] * p
        g = gcd(*new, d)
        if g > 1:
            new = [a // g for a in new]
            d //= g
        tab[k] = new
        dens[k] = d
