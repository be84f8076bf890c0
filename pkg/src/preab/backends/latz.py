"""Finitely generated free abelian groups with integer matrix maps.

Objects are the groups Z^r; morphisms are integer matrices.  Kernels
are the honest integer kernels (automatically saturated sublattices,
hence free); the cokernel of f projects onto Z^m modulo the saturation
of the image of f, which keeps every object torsion-free.  The price is
that surjectivity and epimorphy come apart: multiplication by 2 on Z is
both mono and epi here, but certainly not invertible.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from ..core import CatObject, ConstraintViolation, Morphism
from ..lattice import IntLattice, pure_quotient_rows, saturate
from ..linalg import RatMatrix, hstack, kernel_basis, matrix_from_json, matrix_to_json
from .base import MatrixBackend


class LatZBackend(MatrixBackend):
    name = "latz"

    # -- objects -----------------------------------------------------------
    def make_object(self, payload) -> CatObject:
        if not isinstance(payload, int) or payload < 0:
            raise ConstraintViolation("object payload must be a non-negative rank")
        return CatObject(self, payload)

    def obj(self, rank: int) -> CatObject:
        return self.make_object(rank)

    def zero_object(self) -> CatObject:
        return CatObject(self, 0)

    def ambient_dim(self, payload) -> int:
        return payload

    def direct_sum_payload(self, a_payload, b_payload):
        return a_payload + b_payload

    def drop_coordinate(self, payload, j: int):
        if not 0 <= j < payload:
            raise ValueError("coordinate out of range")
        return payload - 1

    # -- morphisms -----------------------------------------------------------
    def check_payload_constraints(self, dom_payload, cod_payload, m: RatMatrix) -> None:
        if not m.is_integral():
            raise ConstraintViolation("matrix must have integer entries")

    def kernel_data(self, f: Morphism):
        n = f.dom.payload
        k = kernel_basis(f.payload)
        cols = []
        for j in range(k.dim):
            col = k.basis.column(j)
            scale = lcm(*(x.denominator for x in col)) if col else 1
            cols.append([x * scale for x in col])
        gens = RatMatrix.from_columns(cols, rows=n)
        lat = saturate(IntLattice.span(n, gens))
        return lat.rank, lat.basis

    def cokernel_data(self, f: Morphism):
        m = f.cod.payload
        image = saturate(IntLattice.span(m, f.payload))
        q = pure_quotient_rows(image)
        return q.rows, q

    # -- generation ------------------------------------------------------------
    def random_object(self, rng, dim_bound: int) -> CatObject:
        return CatObject(self, rng.randint(0, dim_bound))

    def random_morphism(self, rng, a: CatObject, b: CatObject) -> Morphism:
        n, m = a.payload, b.payload
        if rng.random() < 0.2:
            cands = [RatMatrix.zeros(m, n)]
            if n == m:
                cands.append(RatMatrix.identity(n))
            if n <= m:
                cands.append(hstack(RatMatrix.identity(n), RatMatrix.zeros(n, m - n)).transpose())
            if m <= n:
                cands.append(hstack(RatMatrix.identity(m), RatMatrix.zeros(m, n - m)))
            return Morphism(self, a, b, rng.choice(cands))
        data = (Fraction(rng.randint(-3, 3)) for _ in range(m * n))
        return Morphism(self, a, b, RatMatrix(m, n, data))

    def random_iso(self, rng, a: CatObject) -> Morphism:
        n = a.payload
        grid = [[int(i == j) for j in range(n)] for i in range(n)]
        for _ in range(2 * n):
            i, j = rng.randrange(n), rng.randrange(n)
            if i != j:
                c = rng.randint(-2, 2)
                grid[i] = [x + c * y for x, y in zip(grid[i], grid[j])]
        if n and rng.random() < 0.5:
            i = rng.randrange(n)
            grid[i] = [-x for x in grid[i]]
        return Morphism(self, a, a,
                        RatMatrix(n, n, (Fraction(x) for row in grid for x in row)))

    # -- serialization ------------------------------------------------------------
    def object_to_json(self, a: CatObject) -> dict:
        return {"rank": a.payload}

    def object_from_json(self, obj: dict) -> CatObject:
        try:
            rank = obj["rank"]
        except (TypeError, KeyError) as exc:
            raise ValueError(f"malformed latz object: {exc}") from exc
        try:
            return self.make_object(rank)
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
            raise ValueError(f"malformed latz morphism: {exc}") from exc
        try:
            return self.make_morphism(dom, cod, matrix)
        except ConstraintViolation as exc:
            raise ValueError(str(exc)) from exc
