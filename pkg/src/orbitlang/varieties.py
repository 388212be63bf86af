"""Plane curves and affine varieties with exact rational coefficients."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ReducibleInput
from .polynomials import Polynomial

__all__ = ["PlaneCurve", "AffineVariety"]

PLANE_VARS = ("x", "y")


@dataclass(frozen=True)
class PlaneCurve:
    """Zero locus in the affine plane of one bivariate polynomial."""

    poly: Polynomial

    def __post_init__(self):
        if self.poly.variables != PLANE_VARS:
            object.__setattr__(self, "poly", self.poly.with_variables(PLANE_VARS))
        if self.poly.is_zero or self.poly.is_constant():
            raise ValueError("a plane curve needs a nonconstant polynomial")

    def normalized(self) -> Polynomial:
        _, prim = self.poly.content_and_primitive()
        return prim

    def assert_irreducible(self):
        _, factors = self.poly.factor_list()
        if len(factors) != 1 or factors[0][1] != 1:
            raise ReducibleInput("curve polynomial is not irreducible over Q")

    def contains(self, x, y) -> bool:
        return self.poly.evaluate({"x": x, "y": y}) == 0

    def __eq__(self, other):
        if not isinstance(other, PlaneCurve):
            return NotImplemented
        return self.normalized() == other.normalized()

    def __hash__(self):
        return hash(self.normalized())


@dataclass(frozen=True)
class AffineVariety:
    """Common zero locus of finitely many polynomials in x1..xg.

    An empty generator list is the whole space.
    """

    generators: tuple[Polynomial, ...]
    dimension_ambient: int

    @classmethod
    def of(cls, generators, g: int) -> "AffineVariety":
        """Normalize generators into the coordinate names x1..xg.

        The plane aliases x -> x1 and y -> x2 are accepted for g >= 2 (and
        x -> x1 alone for g = 1).
        """
        names = tuple(f"x{i + 1}" for i in range(g))
        alias = {"x": "x1", "y": "x2"}
        gens = []
        for gen in generators:
            if any(v in alias for v in gen.variables):
                gen = gen.rename_variables(alias)
            if gen.variables != names:
                gen = gen.with_variables(names)
            gens.append(gen)
        return cls(tuple(gens), g)

    def contains(self, point) -> bool:
        values = {f"x{i + 1}": v for i, v in enumerate(point)}
        return all(gen.evaluate(values) == 0 for gen in self.generators)
