"""Exact integer lattice arithmetic.

Finitely generated subgroups of Z^n are represented by a basis matrix
in a column-style Hermite normal form, which is unique per subgroup and
therefore usable for equality tests.  The Smith normal form (with its
transform matrices) supplies saturations and torsion-free quotient
projections; both are needed to take kernels and cokernels of integer
matrices inside the category of finitely generated free abelian groups.

All matrices are :class:`preab.linalg.RatMatrix` values whose entries
happen to be integers; everything stays exact.
"""

from __future__ import annotations

from fractions import Fraction

from .linalg import RatMatrix, solve_right


def _int_grid(m: RatMatrix) -> list[list[int]]:
    if not m.is_integral():
        raise ValueError("matrix has non-integer entries")
    return [[int(x) for x in m.row(i)] for i in range(m.rows)]


def _grid_matrix(grid: list[list[int]], rows: int, cols: int) -> RatMatrix:
    return RatMatrix(rows, cols, (Fraction(x) for row in grid for x in row))


def column_hnf(m: RatMatrix) -> RatMatrix:
    """Canonical basis of the column span of ``m`` over Z.

    The result has full column rank, pivot rows strictly increasing,
    positive pivots, zero entries to the right of each pivot, and the
    entries to the left of a pivot reduced into [0, pivot).  It depends
    only on the generated subgroup, so it decides lattice equality.
    """
    grid = _int_grid(m)
    nrows, ncols = m.rows, m.cols
    cols = [[grid[i][j] for i in range(nrows)] for j in range(ncols)]
    done = 0
    for i in range(nrows):
        active = [j for j in range(done, ncols) if cols[j][i] != 0]
        if not active:
            continue
        # gcd-eliminate row i across the active columns
        while True:
            active = [j for j in range(done, ncols) if cols[j][i] != 0]
            if len(active) <= 1:
                break
            jmin = min(active, key=lambda j: abs(cols[j][i]))
            pivot = cols[jmin][i]
            for j in active:
                if j == jmin:
                    continue
                q = cols[j][i] // pivot
                cols[j] = [a - q * b for a, b in zip(cols[j], cols[jmin])]
        j = [j for j in range(done, ncols) if cols[j][i] != 0][0]
        cols[done], cols[j] = cols[j], cols[done]
        if cols[done][i] < 0:
            cols[done] = [-a for a in cols[done]]
        pivot = cols[done][i]
        for j in range(done):
            q = cols[j][i] // pivot  # floor division puts the entry in [0, pivot)
            if q:
                cols[j] = [a - q * b for a, b in zip(cols[j], cols[done])]
        done += 1
    kept = cols[:done]
    return RatMatrix(nrows, done, (Fraction(kept[j][i]) for i in range(nrows) for j in range(done)))


def smith_with_transforms(m: RatMatrix) -> tuple[RatMatrix, RatMatrix, RatMatrix, RatMatrix]:
    """Smith normal form: returns (u, uinv, d, v) with u @ m @ v == d.

    ``u`` and ``v`` are unimodular, ``uinv`` is the exact inverse of
    ``u`` (tracked during elimination, not recomputed), and ``d`` is
    diagonal with non-negative entries satisfying d[i] | d[i+1].
    """
    nrows, ncols = m.rows, m.cols
    a = _int_grid(m)
    u = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    uinv = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    v = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def row_op(i, k, q):  # row i -= q * row k; uinv gets the inverse column op
        a[i] = [x - q * y for x, y in zip(a[i], a[k])]
        u[i] = [x - q * y for x, y in zip(u[i], u[k])]
        for r in range(nrows):
            uinv[r][k] += q * uinv[r][i]

    def row_swap(i, k):
        a[i], a[k] = a[k], a[i]
        u[i], u[k] = u[k], u[i]
        for r in range(nrows):
            uinv[r][i], uinv[r][k] = uinv[r][k], uinv[r][i]

    def row_negate(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]
        for r in range(nrows):
            uinv[r][i] = -uinv[r][i]

    def col_op(j, k, q):  # col j -= q * col k
        for r in range(nrows):
            a[r][j] -= q * a[r][k]
        for r in range(ncols):
            v[r][j] -= q * v[r][k]

    def col_swap(j, k):
        for r in range(nrows):
            a[r][j], a[r][k] = a[r][k], a[r][j]
        for r in range(ncols):
            v[r][j], v[r][k] = v[r][k], v[r][j]

    t = 0
    while t < min(nrows, ncols):
        # choose the smallest nonzero entry in the trailing block as pivot
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        row_swap(t, best[0])
        col_swap(t, best[1])
        while True:
            dirty = False
            for i in range(t + 1, nrows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    row_op(i, t, q)
                    if a[i][t]:
                        row_swap(t, i)
                        dirty = True
            for j in range(t + 1, ncols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    col_op(j, t, q)
                    if a[t][j]:
                        col_swap(t, j)
                        dirty = True
            if not dirty and all(a[i][t] == 0 for i in range(t + 1, nrows)) \
                    and all(a[t][j] == 0 for j in range(t + 1, ncols)):
                break
        if a[t][t] < 0:
            row_negate(t)
        # the pivot must divide the rest of the block; if not, fold the
        # offending row in and redo this position
        offender = None
        for i in range(t + 1, nrows):
            for j in range(t + 1, ncols):
                if a[i][j] % a[t][t] != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_op(t, offender, -1)
            continue
        t += 1
    return (
        _grid_matrix(u, nrows, nrows),
        _grid_matrix(uinv, nrows, nrows),
        _grid_matrix(a, nrows, ncols),
        _grid_matrix(v, ncols, ncols),
    )


def elementary_divisors(m: RatMatrix) -> list[int]:
    _, _, d, _ = smith_with_transforms(m)
    out = []
    for i in range(min(d.rows, d.cols)):
        x = d.entry(i, i)
        if x != 0:
            out.append(int(x))
    return out


class IntLattice:
    """A finitely generated subgroup of Z^n in canonical basis form."""

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, basis: RatMatrix):
        if basis.rows != ambient_dim:
            raise ValueError("basis does not live in the stated ambient group")
        if column_hnf(basis) != basis:
            raise ValueError("basis is not in canonical form; use IntLattice.span")
        self.ambient_dim = ambient_dim
        self.basis = basis

    @classmethod
    def span(cls, ambient_dim: int, generators: RatMatrix) -> "IntLattice":
        if generators.rows != ambient_dim:
            raise ValueError("generators have the wrong length")
        return cls(ambient_dim, column_hnf(generators))

    @classmethod
    def zero(cls, ambient_dim: int) -> "IntLattice":
        return cls(ambient_dim, RatMatrix.zeros(ambient_dim, 0))

    @classmethod
    def full(cls, ambient_dim: int) -> "IntLattice":
        return cls(ambient_dim, RatMatrix.identity(ambient_dim))

    @property
    def rank(self) -> int:
        return self.basis.cols

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntLattice):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def __repr__(self) -> str:
        return f"IntLattice(rank {self.rank} in Z^{self.ambient_dim})"

    def member(self, v: RatMatrix) -> bool:
        """Is the integer column vector ``v`` in this subgroup?"""
        x = solve_right(self.basis, v)
        return x is not None and x.is_integral()

    def contains(self, other: "IntLattice") -> bool:
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient groups differ")
        if other.rank == 0:
            return True
        x = solve_right(self.basis, other.basis)
        return x is not None and x.is_integral()


def saturate(l: IntLattice) -> IntLattice:
    """Smallest subgroup containing ``l`` with torsion-free quotient.

    Computes span_Q(l) intersected with Z^n.  Idempotent and
    inflationary; the result has the same rank as ``l``.
    """
    if l.rank == 0:
        return l
    _, uinv, d, _ = smith_with_transforms(l.basis)
    r = sum(1 for i in range(min(d.rows, d.cols)) if d.entry(i, i) != 0)
    cols = RatMatrix(l.ambient_dim, r,
                     (uinv.entry(i, j) for i in range(l.ambient_dim) for j in range(r)))
    return IntLattice.span(l.ambient_dim, cols)


def is_saturated(l: IntLattice) -> bool:
    return saturate(l) == l


def pure_quotient_rows(l: IntLattice) -> RatMatrix:
    """Projection matrix q: Z^n -> Z^(n-rank) with kernel exactly ``l``.

    Requires ``l`` saturated, so the quotient is free and q can be taken
    surjective; q consists of rows of a unimodular matrix.
    """
    n = l.ambient_dim
    if l.rank == 0:
        return RatMatrix.identity(n)
    u, _, d, _ = smith_with_transforms(l.basis)
    divisors = [d.entry(i, i) for i in range(min(d.rows, d.cols)) if d.entry(i, i) != 0]
    if any(x != 1 for x in divisors):
        raise ValueError("lattice is not saturated; saturate it first")
    r = len(divisors)
    return RatMatrix(n - r, n, (u.entry(i, j) for i in range(r, n) for j in range(n)))


def lattice_to_json(l: IntLattice) -> dict:
    from .linalg import matrix_to_json

    return {"ambient_dim": l.ambient_dim, "basis": matrix_to_json(l.basis)}


def lattice_from_json(obj: dict) -> IntLattice:
    from .linalg import matrix_from_json

    try:
        return IntLattice.span(obj["ambient_dim"], matrix_from_json(obj["basis"]))
    except (TypeError, KeyError) as exc:
        raise ValueError(f"malformed lattice object: {exc}") from exc
