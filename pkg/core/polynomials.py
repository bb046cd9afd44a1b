"""Dense multivariate polynomials and polynomial vector fields.

A polynomial in ``d`` variables (d = 2 or 3) is stored as a coefficient
array ``C`` with ``C[i, j]`` (or ``C[i, j, k]``) multiplying
``x**i * y**j`` (``* z**k``). Evaluation and differentiation use
``numpy.polynomial.polynomial``; products are discrete convolutions of the
coefficient arrays.

Exact integrals are available over the reference domains used by the
element catalog:

* ``simplex``  - unit triangle / unit tetrahedron
* ``cube``     - unit square / unit cube
* ``prism``    - unit triangle times the unit interval
"""
from math import factorial
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve

Number = Union[int, float]

DOMAINS = ("simplex", "cube", "prism")


class Polynomial:
    """Polynomial in two or three variables with dense coefficients"""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim not in (2, 3):
            raise ValueError(f"Coefficient array must be 2D or 3D, got shape {coeffs.shape}")
        self.coeffs = coeffs

    # Construction

    @classmethod
    def constant(cls, value: Number, dim: int) -> "Polynomial":
        return cls(np.full((1,) * dim, float(value)))

    @classmethod
    def monomial(cls, exponents: Sequence[int], coefficient: Number = 1.0) -> "Polynomial":
        coeffs = np.zeros(tuple(e + 1 for e in exponents))
        coeffs[tuple(exponents)] = coefficient
        return cls(coeffs)

    @classmethod
    def variable(cls, axis: int, dim: int) -> "Polynomial":
        exponents = [0] * dim
        exponents[axis] = 1
        return cls.monomial(exponents)

    # Properties

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    @property
    def degree(self) -> int:
        """Total degree (-1 for the zero polynomial)"""
        nonzero = np.argwhere(self.coeffs != 0.0)
        if nonzero.size == 0:
            return -1
        return int(nonzero.sum(axis=1).max())

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def terms(self) -> Iterable[Tuple[Tuple[int, ...], float]]:
        """Yield (exponents, coefficient) for every nonzero term"""
        for index in np.argwhere(self.coeffs != 0.0):
            key = tuple(int(e) for e in index)
            yield key, float(self.coeffs[key])

    # Arithmetic

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise ValueError(f"Dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return Polynomial.constant(other, self.dim)

    @staticmethod
    def _padded(a: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        return np.pad(a, [(0, s - n) for n, s in zip(a.shape, shape)])

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        shape = tuple(max(a, b) for a, b in zip(self.coeffs.shape, other.coeffs.shape))
        return Polynomial(self._padded(self.coeffs, shape) + self._padded(other.coeffs, shape))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial(self.coeffs * float(other))
        other = self._coerce(other)
        return Polynomial(convolve(self.coeffs, other.coeffs, method="direct"))

    __rmul__ = __mul__

    def __truediv__(self, value: Number) -> "Polynomial":
        return Polynomial(self.coeffs / float(value))

    def __pow__(self, power: int) -> "Polynomial":
        result = Polynomial.constant(1.0, self.dim)
        for _ in range(power):
            result = result * self
        return result

    # Calculus

    def __call__(self, points) -> np.ndarray:
        """Evaluate at points of shape (n, d) (or a single point of shape (d,))"""
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        pts = np.atleast_2d(points)
        if pts.shape[1] != self.dim:
            raise ValueError(f"Expected points with {self.dim} coordinates, got {pts.shape[1]}")
        if self.dim == 2:
            values = npoly.polyval2d(pts[:, 0], pts[:, 1], self.coeffs)
        else:
            values = npoly.polyval3d(pts[:, 0], pts[:, 1], pts[:, 2], self.coeffs)
        return values[0] if single else values

    def diff(self, axis: int) -> "Polynomial":
        if self.coeffs.shape[axis] == 1:
            shape = list(self.coeffs.shape)
            return Polynomial(np.zeros(shape))
        return Polynomial(npoly.polyder(self.coeffs, m=1, axis=axis))

    def integrate(self, domain: str) -> float:
        """Exact integral over the reference domain (not normalized by its volume)"""
        return float(np.sum(self.coeffs * monomial_integrals(self.coeffs.shape, domain)))

    def __repr__(self) -> str:
        names = "xyz"
        parts = []
        for exponents, c in self.terms():
            factors = "*".join(
                names[k] if e == 1 else f"{names[k]}^{e}" for k, e in enumerate(exponents) if e
            )
            parts.append(f"{c:+.6g}{'*' + factors if factors else ''}")
        return f"Polynomial({' '.join(parts) or '0'})"


def coordinates(dim: int) -> Tuple[Polynomial, ...]:
    """The coordinate functions x, y (, z) as polynomials"""
    return tuple(Polynomial.variable(axis, dim) for axis in range(dim))


def monomial_integrals(shape: Tuple[int, ...], domain: str) -> np.ndarray:
    """Exact reference-domain integrals of x^a y^b (z^c) for every index of ``shape``"""
    if domain not in DOMAINS:
        raise ValueError(f"Unknown integration domain: {domain}")
    dim = len(shape)
    table = np.zeros(shape)
    for index in np.ndindex(*shape):
        table[index] = _monomial_integral(index, domain, dim)
    return table


def _monomial_integral(exponents: Tuple[int, ...], domain: str, dim: int) -> float:
    if domain == "cube":
        return float(np.prod([1.0 / (e + 1) for e in exponents]))
    if domain == "simplex":
        numerator = np.prod([float(factorial(e)) for e in exponents])
        return numerator / factorial(sum(exponents) + dim)
    # prism: triangle in (x, y) times [0, 1] in z
    a, b, c = exponents
    return factorial(a) * factorial(b) / factorial(a + b + 2) / (c + 1)


class VectorField:
    """Vector of polynomials, one per coordinate direction"""

    __slots__ = ("components",)

    def __init__(self, *components):
        if len(components) == 1 and isinstance(components[0], (tuple, list)):
            components = tuple(components[0])
        dims = {c.dim for c in components if isinstance(c, Polynomial)}
        if len(dims) > 1:
            raise ValueError(f"Components of mixed dimensions {sorted(dims)}")
        # all-scalar fields take their dimension from the number of components
        dim = dims.pop() if dims else len(components)
        if dim not in (2, 3):
            raise ValueError(f"VectorField needs 2 or 3 components, got {len(components)}")
        self.components = tuple(
            c if isinstance(c, Polynomial) else Polynomial.constant(c, dim) for c in components
        )
        if len(self.components) != dim:
            raise ValueError(f"Expected {dim} components, got {len(self.components)}")

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "VectorField":
        return VectorField(tuple(-a for a in self.components))

    def __mul__(self, scalar: Number) -> "VectorField":
        return VectorField(tuple(a * float(scalar) for a in self.components))

    __rmul__ = __mul__

    def __call__(self, points) -> np.ndarray:
        """Values at points of shape (n, d), returned with shape (n, d)"""
        points = np.asarray(points, dtype=float)
        values = np.stack([c(points) for c in self.components], axis=-1)
        return values

    def divergence(self) -> Polynomial:
        result = self.components[0].diff(0)
        for axis in range(1, self.dim):
            result = result + self.components[axis].diff(axis)
        return result

    def dot(self, direction: Sequence[float]) -> Polynomial:
        result = self.components[0] * float(direction[0])
        for axis in range(1, self.dim):
            result = result + self.components[axis] * float(direction[axis])
        return result


def span_rank(polynomials: Sequence[Polynomial], tol: float = 1e-10) -> int:
    """Rank of the coefficient matrix of a list of polynomials"""
    return int(np.linalg.matrix_rank(coefficient_matrix(polynomials), tol=tol))


def coefficient_matrix(polynomials: Sequence[Polynomial]) -> np.ndarray:
    """Rows are the flattened coefficient arrays, padded to a common shape"""
    dim = polynomials[0].dim
    shape = tuple(max(p.coeffs.shape[k] for p in polynomials) for k in range(dim))
    return np.array([Polynomial._padded(p.coeffs, shape).ravel() for p in polynomials])
