"""Exact linear algebra over the rationals.

Everything here is built on :class:`fractions.Fraction`, so results are
exact; no floating point is used anywhere.  Matrices are immutable and
row-major.  Subspaces of Q^n are kept in a canonical basis (reduced
column echelon form), which makes subspace equality a plain ``==``.

>>> m = RatMatrix.from_rows([[2, 4], [1, 2]])
>>> rref(m) == RatMatrix.from_rows([[1, 2], [0, 0]])
True
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


def frac(x) -> Fraction:
    """Coerce ints, strings like ``"3/4"``, and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


class RatMatrix:
    """An immutable rows x cols matrix of Fractions.

    Zero-row and zero-column shapes are fully supported; they show up
    naturally as maps to and from zero-dimensional spaces.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Iterable[Fraction]):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        self.rows = rows
        self.cols = cols
        self._data = tuple(data)
        if len(self._data) != rows * cols:
            raise ValueError(
                f"expected {rows * cols} entries, got {len(self._data)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RatMatrix":
        """Build from nested sequences; ``cols`` disambiguates zero-row shapes."""
        nrows = len(rows)
        if nrows == 0:
            return cls(0, cols or 0, ())
        ncols = len(rows[0])
        data = []
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            data.extend(frac(x) for x in r)
        return cls(nrows, ncols, data)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "RatMatrix":
        ncols = len(columns)
        if ncols == 0:
            return cls(rows or 0, 0, ())
        return cls.from_rows([[c[i] for c in columns] for i in range(len(columns[0]))],
                             cols=ncols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        one, zero = Fraction(1), Fraction(0)
        return cls(n, n, (one if i == j else zero for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    def entry(self, i: int, j: int) -> Fraction:
        return self._data[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return self._data[j :: self.cols] if self.cols else ()

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_zero(self) -> bool:
        return all(x == 0 for x in self._data)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self._data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return RatMatrix(self.rows, self.cols, (a + b for a, b in zip(self._data, other._data)))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def __neg__(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, (-a for a in self._data))

    def scale(self, c) -> "RatMatrix":
        c = frac(c)
        return RatMatrix(self.rows, self.cols, (c * a for a in self._data))

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        n, k, m = self.rows, self.cols, other.cols
        out = []
        for i in range(n):
            ri = self.row(i)
            for j in range(m):
                # sum over an empty index range is the exact zero
                out.append(sum((ri[t] * other._data[t * m + j] for t in range(k)), Fraction(0)))
        return RatMatrix(n, m, out)

    def transpose(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows,
                         (self._data[j * self.cols + i] for i in range(self.cols) for j in range(self.rows)))

    def delete_row(self, i: int) -> "RatMatrix":
        keep = [r for r in range(self.rows) if r != i]
        return RatMatrix(self.rows - 1, self.cols, (x for r in keep for x in self.row(r)))

    def delete_column(self, j: int) -> "RatMatrix":
        keep = [c for c in range(self.cols) if c != j]
        return RatMatrix(self.rows, self.cols - 1,
                         (self.entry(r, c) for r in range(self.rows) for c in keep))

    def with_entry(self, i: int, j: int, value) -> "RatMatrix":
        data = list(self._data)
        data[i * self.cols + j] = frac(value)
        return RatMatrix(self.rows, self.cols, data)

    def __repr__(self) -> str:
        if self.rows == 0 or self.cols == 0:
            return f"RatMatrix({self.rows}x{self.cols})"
        body = "; ".join(" ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"RatMatrix[{body}]"


def hstack(*mats: RatMatrix) -> RatMatrix:
    mats = [m for m in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise ValueError("row counts differ")
    data = []
    for i in range(rows):
        for m in mats:
            data.extend(m.row(i))
    return RatMatrix(rows, sum(m.cols for m in mats), data)


def vstack(*mats: RatMatrix) -> RatMatrix:
    mats = [m for m in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise ValueError("column counts differ")
    data = []
    for m in mats:
        data.extend(m._data)
    return RatMatrix(sum(m.rows for m in mats), cols, data)


def block_diag(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    top = hstack(a, RatMatrix.zeros(a.rows, b.cols))
    bot = hstack(RatMatrix.zeros(b.rows, a.cols), b)
    return vstack(top, bot)


def _rref_pivots(m: RatMatrix) -> tuple[RatMatrix, tuple[int, ...]]:
    """Reduced row echelon form together with its pivot columns."""
    rows = [list(m.row(i)) for i in range(m.rows)]
    nrows, ncols = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        pivot_row = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pv = rows[r][c]
        if pv != 1:
            rows[r] = [x / pv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return RatMatrix(nrows, ncols, (x for row in rows for x in row)), tuple(pivots)


def rref(m: RatMatrix) -> RatMatrix:
    """Reduced row echelon form (unique for the row space of ``m``)."""
    return _rref_pivots(m)[0]


def rank(m: RatMatrix) -> int:
    return len(_rref_pivots(m)[1])


def column_echelon_basis(m: RatMatrix) -> RatMatrix:
    """Canonical basis of the column space of ``m``.

    The columns of the result are the nonzero rows of rref(m^T); this
    reduced column echelon form depends only on the span, so two
    matrices have equal column space iff this function agrees on them.
    """
    r, pivots = _rref_pivots(m.transpose())
    cols = [list(r.row(i)) for i in range(len(pivots))]
    return RatMatrix.from_columns(cols, rows=m.rows)


def kernel_basis(m: RatMatrix) -> "Subspace":
    """The solution space of m x = 0, as a canonical Subspace of Q^cols."""
    r, pivots = _rref_pivots(m)
    free = [c for c in range(m.cols) if c not in pivots]
    cols = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -r.entry(i, f)
        cols.append(v)
    basis = RatMatrix.from_columns(cols, rows=m.cols)
    return Subspace(m.cols, column_echelon_basis(basis))


def image_basis(m: RatMatrix) -> "Subspace":
    """The column space of ``m``, as a canonical Subspace of Q^rows."""
    return Subspace(m.rows, column_echelon_basis(m))


def solve_right(a: RatMatrix, b: RatMatrix) -> RatMatrix | None:
    """Solve a @ x = b exactly, or return None when no solution exists.

    When the system is underdetermined the free variables are set to
    zero, so the returned solution is a canonical one.
    """
    if a.rows != b.rows:
        raise ValueError(f"row mismatch: {a.shape} vs {b.shape}")
    aug, pivots = _rref_pivots(hstack(a, b))
    if any(p >= a.cols for p in pivots):
        return None  # a pivot in the b block means the system is inconsistent
    out = [[Fraction(0)] * b.cols for _ in range(a.cols)]
    for i, p in enumerate(pivots):
        for j in range(b.cols):
            out[p][j] = aug.entry(i, a.cols + j)
    return RatMatrix.from_rows(out, cols=b.cols)


def invert(m: RatMatrix) -> RatMatrix | None:
    """Exact inverse of a square matrix, or None if singular."""
    if m.rows != m.cols:
        return None
    x = solve_right(m, RatMatrix.identity(m.rows))
    if x is None:
        return None
    return x if (m @ x) == RatMatrix.identity(m.rows) else None


class Subspace:
    """A linear subspace of Q^n held in canonical form.

    The basis matrix is n x dim in reduced column echelon form, so two
    Subspace values are equal exactly when they describe the same
    subspace.  Use :meth:`span` to build one from any spanning set.
    """

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, basis: RatMatrix):
        if basis.rows != ambient_dim:
            raise ValueError("basis does not live in the stated ambient space")
        if column_echelon_basis(basis) != basis:
            raise ValueError("basis is not in canonical form; use Subspace.span")
        self.ambient_dim = ambient_dim
        self.basis = basis

    @classmethod
    def span(cls, ambient_dim: int, vectors) -> "Subspace":
        """Subspace spanned by the columns of ``vectors`` (or listed vectors)."""
        if not isinstance(vectors, RatMatrix):
            vectors = RatMatrix.from_columns(vectors, rows=ambient_dim)
        if vectors.rows != ambient_dim:
            raise ValueError("spanning vectors have the wrong length")
        return cls(ambient_dim, column_echelon_basis(vectors))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RatMatrix.zeros(ambient_dim, 0))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RatMatrix.identity(ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.cols

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim {self.dim} of Q^{self.ambient_dim})"

    def contains_vector(self, v: RatMatrix) -> bool:
        return solve_right(self.basis, v) is not None

    def contains(self, other: "Subspace") -> bool:
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient spaces differ")
        if other.dim == 0:
            return True
        return solve_right(self.basis, other.basis) is not None

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient spaces differ")
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        # (x, y) with B1 x = B2 y; the intersection is B1 x
        k = kernel_basis(hstack(self.basis, -other.basis))
        coeffs = RatMatrix(self.dim, k.dim,
                           (k.basis.entry(i, j) for i in range(self.dim) for j in range(k.dim)))
        return Subspace.span(self.ambient_dim, self.basis @ coeffs)

    def add(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient spaces differ")
        return Subspace.span(self.ambient_dim, hstack(self.basis, other.basis))

    def __add__(self, other: "Subspace") -> "Subspace":
        return self.add(other)


def pushforward(m: RatMatrix, s: Subspace) -> Subspace:
    """Image of ``s`` under the linear map ``m``."""
    if m.cols != s.ambient_dim:
        raise ValueError("map domain does not match subspace ambient space")
    return Subspace.span(m.rows, m @ s.basis)


def preimage(m: RatMatrix, s: Subspace) -> Subspace:
    """The subspace of vectors x with m x in ``s``."""
    if m.rows != s.ambient_dim:
        raise ValueError("map codomain does not match subspace ambient space")
    return kernel_basis(complement_rows(s) @ m)


def complement_rows(s: Subspace) -> RatMatrix:
    """Canonical coordinates for the quotient Q^n / s.

    Returns a (n - dim) x n matrix q of full row rank with q b = 0 for
    every b in s; its kernel is exactly s, so q serves as the quotient
    projection in explicit coordinates.
    """
    return kernel_basis(s.basis.transpose()).basis.transpose()


def matrix_to_json(m: RatMatrix) -> dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[str(x) for x in m.row(i)] for i in range(m.rows)],
    }


def matrix_from_json(obj: dict) -> RatMatrix:
    try:
        rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    except (TypeError, KeyError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if not isinstance(rows, int) or not isinstance(cols, int):
        raise ValueError("matrix rows/cols must be integers")
    if len(entries) != rows or any(len(r) != cols for r in entries):
        raise ValueError("matrix entry grid does not match stated shape")
    return RatMatrix(rows, cols, (frac(x) for row in entries for x in row))


def subspace_to_json(s: Subspace) -> dict:
    return {"ambient_dim": s.ambient_dim, "basis": matrix_to_json(s.basis)}


def subspace_from_json(obj: dict) -> Subspace:
    try:
        return Subspace.span(obj["ambient_dim"], matrix_from_json(obj["basis"]))
    except (TypeError, KeyError) as exc:
        raise ValueError(f"malformed subspace object: {exc}") from exc
