"""Shared machinery for categories whose morphisms are rational matrices.

A subclass only has to say what its objects are (ambient dimension plus
whatever extra structure it carries), when a matrix respects that
structure, and how to build kernel and cokernel objects.  Composition,
biproducts, division, iso testing and the cone plumbing are generic.
"""

from __future__ import annotations

from typing import Optional

from ..core import Biproduct, CatObject, Category, Cone, ConstraintViolation, Morphism
from ..linalg import RatMatrix, hstack, invert, solve_right


class MatrixBackend(Category):
    """Category base class with RatMatrix morphism payloads."""

    # -- hooks for subclasses ---------------------------------------------
    def ambient_dim(self, payload) -> int:
        raise NotImplementedError

    def check_payload_constraints(self, dom_payload, cod_payload, m: RatMatrix) -> None:
        """Raise ConstraintViolation when ``m`` does not respect structure."""
        raise NotImplementedError

    def direct_sum_payload(self, a_payload, b_payload):
        raise NotImplementedError

    def drop_coordinate(self, payload, j: int):
        """Payload with ambient coordinate ``j`` projected away (for shrinking)."""
        raise NotImplementedError

    def kernel_data(self, f: Morphism) -> tuple[object, RatMatrix]:
        """Apex payload and leg matrix (apex -> dom f) of the kernel."""
        raise NotImplementedError

    def cokernel_data(self, f: Morphism) -> tuple[object, RatMatrix]:
        """Apex payload and leg matrix (cod f -> apex) of the cokernel."""
        raise NotImplementedError

    # -- generic implementations ------------------------------------------
    def is_zero_object(self, a: CatObject) -> bool:
        return self.ambient_dim(a.payload) == 0

    def identity(self, a: CatObject) -> Morphism:
        return Morphism(self, a, a, RatMatrix.identity(self.ambient_dim(a.payload)))

    def zero_morphism(self, a: CatObject, b: CatObject) -> Morphism:
        return Morphism(self, a, b,
                        RatMatrix.zeros(self.ambient_dim(b.payload), self.ambient_dim(a.payload)))

    def is_zero_morphism(self, f: Morphism) -> bool:
        return f.payload.is_zero()

    def compose(self, g: Morphism, f: Morphism) -> Morphism:
        if f.category is not self or g.category is not self:
            raise ValueError("morphisms belong to a different category")
        if f.cod != g.dom:
            raise ValueError("morphisms do not compose")
        return Morphism(self, f.dom, g.cod, g.payload @ f.payload)

    def add(self, f: Morphism, g: Morphism) -> Morphism:
        if f.dom != g.dom or f.cod != g.cod:
            raise ValueError("can only add parallel morphisms")
        return Morphism(self, f.dom, f.cod, f.payload + g.payload)

    def negate(self, f: Morphism) -> Morphism:
        return Morphism(self, f.dom, f.cod, -f.payload)

    def biproduct(self, a: CatObject, b: CatObject) -> Biproduct:
        n, m = self.ambient_dim(a.payload), self.ambient_dim(b.payload)
        ob = CatObject(self, self.direct_sum_payload(a.payload, b.payload))
        top = hstack(RatMatrix.identity(n), RatMatrix.zeros(n, m))
        bot = hstack(RatMatrix.zeros(m, n), RatMatrix.identity(m))
        return Biproduct(
            ob=ob,
            inj1=Morphism(self, a, ob, top.transpose()),
            inj2=Morphism(self, b, ob, bot.transpose()),
            proj1=Morphism(self, ob, a, top),
            proj2=Morphism(self, ob, b, bot),
        )

    def kernel(self, f: Morphism) -> Cone:
        apex_payload, leg_matrix = self.kernel_data(f)
        apex = CatObject(self, apex_payload)
        leg = Morphism(self, apex, f.dom, leg_matrix)

        def factor(x: Morphism) -> Optional[Morphism]:
            if x.cod != f.dom:
                raise ValueError("test morphism must land in dom(f)")
            if not self.is_zero_morphism(self.compose(f, x)):
                return None
            return self.divide_left(leg, x)

        return Cone(kind="kernel", of=f, apex=apex, leg=leg, factor=factor)

    def cokernel(self, f: Morphism) -> Cone:
        apex_payload, leg_matrix = self.cokernel_data(f)
        apex = CatObject(self, apex_payload)
        leg = Morphism(self, f.cod, apex, leg_matrix)

        def factor(x: Morphism) -> Optional[Morphism]:
            if x.dom != f.cod:
                raise ValueError("test morphism must start at cod(f)")
            if not self.is_zero_morphism(self.compose(x, f)):
                return None
            return self.divide_right(leg, x)

        return Cone(kind="cokernel", of=f, apex=apex, leg=leg, factor=factor)

    def divide_left(self, g: Morphism, h: Morphism) -> Optional[Morphism]:
        if g.cod != h.cod:
            raise ValueError("divide_left needs a common codomain")
        x = solve_right(g.payload, h.payload)
        if x is None:
            return None
        return self.try_morphism(h.dom, g.dom, x)

    def divide_right(self, g: Morphism, h: Morphism) -> Optional[Morphism]:
        if g.dom != h.dom:
            raise ValueError("divide_right needs a common domain")
        x = solve_right(g.payload.transpose(), h.payload.transpose())
        if x is None:
            return None
        return self.try_morphism(g.cod, h.cod, x.transpose())

    def is_iso(self, f: Morphism) -> bool:
        # invert the ambient matrix, then let the structure constraints
        # decide whether the inverse is a morphism of this category
        inv = invert(f.payload)
        if inv is None:
            return False
        return self.try_morphism(f.cod, f.dom, inv) is not None

    def make_morphism(self, dom: CatObject, cod: CatObject, payload) -> Morphism:
        if not isinstance(payload, RatMatrix):
            raise ConstraintViolation("morphism payload must be a RatMatrix")
        if payload.rows != self.ambient_dim(cod.payload) or \
                payload.cols != self.ambient_dim(dom.payload):
            raise ConstraintViolation(
                f"matrix shape {payload.shape} does not match objects "
                f"({self.ambient_dim(cod.payload)} x {self.ambient_dim(dom.payload)} expected)")
        self.check_payload_constraints(dom.payload, cod.payload, payload)
        return Morphism(self, dom, cod, payload)
