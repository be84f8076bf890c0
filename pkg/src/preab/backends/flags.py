"""Rational vector spaces carrying a chain of marked subspaces.

One implementation covers three backends: plain finite-dimensional
Q-vector spaces (no marked subspaces), spaces with a single marked
subspace, and spaces with a length-3 chain V1 <= V2 <= V3.  An object
is a pair (ambient dimension, chain); a morphism is any matrix mapping
each marked layer of its domain into the matching layer of its
codomain.

With at least one layer these categories have non-invertible
bimorphisms (for example the identity matrix from (V, 0) to (V, V)),
which is what makes them interesting test beds: kernels and cokernels
exist everywhere, but a mono epi need not be an iso.
"""

from __future__ import annotations

from fractions import Fraction

from ..core import CatObject, ConstraintViolation, Morphism
from ..linalg import (
    RatMatrix,
    Subspace,
    complement_rows,
    hstack,
    image_basis,
    invert,
    kernel_basis,
    matrix_from_json,
    matrix_to_json,
    preimage,
    pushforward,
    solve_right,
)
from .base import MatrixBackend


def _random_entry(rng) -> Fraction:
    return Fraction(rng.randint(-3, 3))


def _random_matrix(rng, rows: int, cols: int) -> RatMatrix:
    return RatMatrix(rows, cols, (_random_entry(rng) for _ in range(rows * cols)))


def _adapted_columns(dim: int, layers: tuple[Subspace, ...]) -> tuple[RatMatrix, list[int]]:
    """An invertible matrix whose leading columns run up the chain.

    Returns (p, block) where column j of p belongs to layer block[j]
    (len(layers) meaning "outside every layer"); the columns of each
    initial segment span the corresponding layer.
    """
    cols: list[tuple[Fraction, ...]] = []
    block: list[int] = []

    def span_contains(v: RatMatrix) -> bool:
        if not cols:
            return v.is_zero()
        m = RatMatrix.from_columns([list(c) for c in cols], rows=dim)
        return solve_right(m, v) is not None

    for i, layer in enumerate(layers):
        for j in range(layer.basis.cols):
            v = RatMatrix(dim, 1, layer.basis.column(j))
            if not span_contains(v):
                cols.append(layer.basis.column(j))
                block.append(i)
    for k in range(dim):
        v = RatMatrix(dim, 1, (Fraction(int(i == k)) for i in range(dim)))
        if not span_contains(v):
            cols.append(tuple(Fraction(int(i == k)) for i in range(dim)))
            block.append(len(layers))
    p = RatMatrix.from_columns([list(c) for c in cols], rows=dim)
    return p, block


class FlagBackend(MatrixBackend):
    """Q-linear maps preserving a fixed-length chain of subspaces."""

    def __init__(self, name: str, n_layers: int):
        self.name = name
        self.n_layers = n_layers

    # -- objects -----------------------------------------------------------
    def make_object(self, payload) -> CatObject:
        try:
            dim, layers = payload
            layers = tuple(layers)
        except (TypeError, ValueError) as exc:
            raise ConstraintViolation(f"object payload must be (dim, layers): {exc}") from exc
        if not isinstance(dim, int) or dim < 0:
            raise ConstraintViolation("dimension must be a non-negative integer")
        if len(layers) != self.n_layers:
            raise ConstraintViolation(f"expected {self.n_layers} marked layers, got {len(layers)}")
        for s in layers:
            if not isinstance(s, Subspace) or s.ambient_dim != dim:
                raise ConstraintViolation("each layer must be a Subspace of the ambient space")
        for small, big in zip(layers, layers[1:]):
            if not big.contains(small):
                raise ConstraintViolation("marked layers must be nested")
        return CatObject(self, (dim, layers))

    def obj(self, dim: int, layers=()) -> CatObject:
        return self.make_object((dim, tuple(layers)))

    def zero_object(self) -> CatObject:
        return CatObject(self, (0, tuple(Subspace.zero(0) for _ in range(self.n_layers))))

    def ambient_dim(self, payload) -> int:
        return payload[0]

    def direct_sum_payload(self, a_payload, b_payload):
        n, xs = a_payload
        m, ys = b_payload
        layers = []
        for x, y in zip(xs, ys):
            padded = vert_shift(x.basis, 0, m)
            shifted = vert_shift(y.basis, n, 0)
            layers.append(Subspace.span(n + m, hstack(padded, shifted)))
        return (n + m, tuple(layers))

    def drop_coordinate(self, payload, j: int):
        n, layers = payload
        if not 0 <= j < n:
            raise ValueError("coordinate out of range")
        return (n - 1, tuple(Subspace.span(n - 1, s.basis.delete_row(j)) for s in layers))

    # -- morphisms -----------------------------------------------------------
    def check_payload_constraints(self, dom_payload, cod_payload, m: RatMatrix) -> None:
        _, xs = dom_payload
        _, ys = cod_payload
        for x, y in zip(xs, ys):
            if not y.contains(pushforward(m, x)):
                raise ConstraintViolation("matrix does not map marked layers into marked layers")

    def kernel_data(self, f: Morphism):
        n, xs = f.dom.payload
        k = kernel_basis(f.payload)
        layers = tuple(preimage(k.basis, x) for x in xs)
        return (k.dim, layers), k.basis

    def cokernel_data(self, f: Morphism):
        m, ys = f.cod.payload
        q = complement_rows(image_basis(f.payload))
        layers = tuple(pushforward(q, y) for y in ys)
        return (q.rows, layers), q

    # -- generation ------------------------------------------------------------
    def random_object(self, rng, dim_bound: int) -> CatObject:
        roll = rng.random()
        if roll < 0.08:
            return self.zero_object()
        dim = rng.randint(0, dim_bound)
        if roll < 0.14:
            layers = tuple(Subspace.zero(dim) for _ in range(self.n_layers))
        elif roll < 0.20:
            layers = tuple(Subspace.full(dim) for _ in range(self.n_layers))
        else:
            layers = []
            cur = Subspace.zero(dim)
            for _ in range(self.n_layers):
                extra = rng.randint(0, dim)
                if extra:
                    cur = cur + image_basis(_random_matrix(rng, dim, extra))
                layers.append(cur)
            layers = tuple(layers)
        return CatObject(self, (dim, layers))

    def _structural_candidates(self, a: CatObject, b: CatObject) -> list[RatMatrix]:
        n, m = self.ambient_dim(a.payload), self.ambient_dim(b.payload)
        out = [RatMatrix.zeros(m, n)]
        named = []
        if n == m:
            named.append(RatMatrix.identity(n))
        if n <= m:
            named.append(hstack(RatMatrix.identity(n), RatMatrix.zeros(n, m - n)).transpose())
        if m <= n:
            named.append(hstack(RatMatrix.identity(m), RatMatrix.zeros(m, n - m)))
        for cand in named:
            try:
                self.check_payload_constraints(a.payload, b.payload, cand)
            except ConstraintViolation:
                continue
            out.append(cand)
        return out

    def random_morphism(self, rng, a: CatObject, b: CatObject) -> Morphism:
        if rng.random() < 0.2:
            cand = rng.choice(self._structural_candidates(a, b))
            return Morphism(self, a, b, cand)
        n, xs = a.payload
        m, ys = b.payload
        p, block = _adapted_columns(n, xs)
        cols = []
        for j in range(n):
            i = block[j]
            target = ys[i].basis if i < len(ys) else RatMatrix.identity(m)
            coeffs = _random_matrix(rng, target.cols, 1)
            cols.append(list((target @ coeffs).column(0)))
        img = RatMatrix.from_columns(cols, rows=m)
        return Morphism(self, a, b, img @ invert(p))

    def random_iso(self, rng, a: CatObject) -> Morphism:
        n, xs = a.payload
        p, _ = _adapted_columns(n, xs)
        # upper triangular with invertible diagonal fixes every initial
        # span of adapted columns, hence every marked layer
        t = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            t[i][i] = Fraction(rng.choice((1, -1, 2, -2)))
            for j in range(i + 1, n):
                t[i][j] = Fraction(rng.randint(-2, 2))
        tm = RatMatrix.from_rows(t, cols=n)
        return Morphism(self, a, a, p @ tm @ invert(p))

    # -- serialization ------------------------------------------------------------
    def object_to_json(self, a: CatObject) -> dict:
        dim, layers = a.payload
        out: dict = {"dim": dim}
        if self.n_layers == 1:
            out["subspace"] = matrix_to_json(layers[0].basis)
        elif self.n_layers > 1:
            out["flag"] = [matrix_to_json(s.basis) for s in layers]
        return out

    def object_from_json(self, obj: dict) -> CatObject:
        try:
            dim = obj["dim"]
            if self.n_layers == 0:
                layers = ()
            elif self.n_layers == 1:
                layers = (Subspace.span(dim, matrix_from_json(obj["subspace"])),)
            else:
                layers = tuple(Subspace.span(dim, matrix_from_json(m)) for m in obj["flag"])
        except (TypeError, KeyError) as exc:
            raise ValueError(f"malformed {self.name} object: {exc}") from exc
        try:
            return self.make_object((dim, layers))
        except ConstraintViolation as exc:
            raise ValueError(str(exc)) from exc

    def morphism_to_json(self, f: Morphism) -> dict:
        return {
            "backend": self.name,
            "dom": self.object_to_json(f.dom),
            "cod": self.object_to_json(f.cod),
            "matrix": matrix_to_json(f.payload),
        }

    def morphism_from_json(self, obj: dict) -> Morphism:
        try:
            dom = self.object_from_json(obj["dom"])
            cod = self.object_from_json(obj["cod"])
            matrix = matrix_from_json(obj["matrix"])
        except (TypeError, KeyError) as exc:
            raise ValueError(f"malformed {self.name} morphism: {exc}") from exc
        try:
            return self.make_morphism(dom, cod, matrix)
        except ConstraintViolation as exc:
            raise ValueError(str(exc)) from exc


def vert_shift(basis: RatMatrix, above: int, below: int) -> RatMatrix:
    """Pad basis columns with zero rows above and below."""
    from ..linalg import vstack

    return vstack(RatMatrix.zeros(above, basis.cols), basis,
                  RatMatrix.zeros(below, basis.cols))
