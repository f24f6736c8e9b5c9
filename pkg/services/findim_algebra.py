"""
Finite-dimensional associative algebras given by structure constants.

Provides the Jacobson radical (trace-form method), idempotent lifting modulo
a nilpotent ideal and complete sets of primitive orthogonal idempotents.
Hom-space algebras from mf_core are handed to this module as plain
structure constants.
"""
import itertools
import logging
import random
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import sympy

from config import Config
from services.debug import DebugTimer, debug_count, debug_log
from services.errors import (
    DimensionMismatchError, InternalError, PreconditionError,
    UnsupportedAlgebraError, UnsupportedCharacteristicError, ValidationError
)
from services.exact_algebra import Field, SparseVector, Subspace, solve_linear
from services.job_manager import check_cancelled

logger = logging.getLogger(__name__)

Vector = Tuple[Any, ...]

_T = sympy.Symbol('t')


@dataclass
class FinDimAlgebra:
    """
    Algebra with basis b_0..b_{n-1}; ``products[i][j]`` holds b_i*b_j as a
    sparse coordinate vector and ``unit`` the coordinates of 1.
    """
    field: Field
    dimension: int
    products: List[List[SparseVector]]
    unit: Vector
    labels: Optional[List[str]] = None

    def __post_init__(self):
        n = self.dimension
        if len(self.products) != n or any(len(row) != n for row in self.products):
            raise DimensionMismatchError("Structure constants must form an n x n table", {'dimension': n})
        if len(self.unit) != n:
            raise DimensionMismatchError("Unit vector has the wrong length")

    # -- elements ---------------------------------------------------------

    @property
    def domain(self):
        return self.field.domain

    def zero(self) -> Vector:
        return tuple(self.domain.zero for _ in range(self.dimension))

    def one(self) -> Vector:
        return tuple(self.unit)

    def basis_vector(self, i: int) -> Vector:
        return tuple(self.domain.one if j == i else self.domain.zero for j in range(self.dimension))

    def add(self, x: Vector, y: Vector) -> Vector:
        return tuple(a + b for a, b in zip(x, y))

    def sub(self, x: Vector, y: Vector) -> Vector:
        return tuple(a - b for a, b in zip(x, y))

    def scale(self, c, x: Vector) -> Vector:
        return tuple(c * a for a in x)

    def mul(self, x: Vector, y: Vector) -> Vector:
        out = [self.domain.zero] * self.dimension
        for i, a in enumerate(x):
            if not a:
                continue
            row = self.products[i]
            for j, b in enumerate(y):
                if not b:
                    continue
                ab = a * b
                for k, c in row[j].items():
                    out[k] += ab * c
        return tuple(out)

    def power(self, x: Vector, k: int) -> Vector:
        out = self.one()
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def is_zero(self, x: Vector) -> bool:
        return not any(x)

    def sparse(self, x: Vector) -> SparseVector:
        return {i: a for i, a in enumerate(x) if a}

    def dense(self, v: SparseVector) -> Vector:
        return tuple(v.get(i, self.domain.zero) for i in range(self.dimension))

    def left_matrix(self, x: Vector) -> List[List[Any]]:
        """Matrix of y -> x*y in the basis (rows are output coordinates)."""
        columns = [self.mul(x, self.basis_vector(j)) for j in range(self.dimension)]
        return [[columns[j][i] for j in range(self.dimension)] for i in range(self.dimension)]

    def inverse(self, x: Vector) -> Optional[Vector]:
        """Two-sided inverse of x, or None when x is not a unit."""
        if self.dimension == 0:
            return None
        solution = solve_linear(self.left_matrix(x), list(self.unit), self.domain, ncols=self.dimension)
        if not solution.consistent or solution.kernel:
            return None
        y = tuple(solution.solution)
        if self.mul(y, x) != self.one():
            return None
        return y

    def is_unit(self, x: Vector) -> bool:
        return self.inverse(x) is not None

    def is_idempotent(self, x: Vector) -> bool:
        return self.mul(x, x) == tuple(x)

    def trace(self, x: Vector) -> Any:
        """Trace of left multiplication by x."""
        total = self.domain.zero
        for i, a in enumerate(x):
            if not a:
                continue
            for m in range(self.dimension):
                c = self.products[i][m].get(m)
                if c:
                    total += a * c
        return total

    def check_axioms(self) -> None:
        """Raise ValidationError unless the table is associative with the stated unit."""
        n = self.dimension
        one = self.one()
        for i in range(n):
            b = self.basis_vector(i)
            if self.mul(one, b) != b or self.mul(b, one) != b:
                raise ValidationError("Declared unit is not a two-sided identity", {'basis': i})
        for i in range(n):
            for j in range(n):
                bij = self.dense(self.products[i][j])
                for k in range(n):
                    check_cancelled()
                    left = self.mul(bij, self.basis_vector(k))
                    right = self.mul(self.basis_vector(i), self.dense(self.products[j][k]))
                    if left != right:
                        raise ValidationError("Structure constants are not associative", {'i': i, 'j': j, 'k': k})

    def is_commutative(self) -> bool:
        return all(self.products[i][j] == self.products[j][i]
                   for i in range(self.dimension) for j in range(i + 1, self.dimension))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_matrices(cls, field: Field, matrices: Sequence[Sequence[Sequence[Any]]],
                      labels: Optional[List[str]] = None) -> 'FinDimAlgebra':
        """
        Subalgebra of M_m(k) spanned by the given m x m matrices.

        The basis used is the reduced echelon basis of their span, so it may
        differ from the input list.
        """
        domain = field.domain
        if not matrices:
            raise ValidationError("Need at least one matrix")
        m = len(matrices[0])
        flat = lambda mat: {i * m + j: mat[i][j] for i in range(m) for j in range(m) if mat[i][j]}
        span = Subspace(m * m, domain, [flat(mat) for mat in matrices])
        basis = [[[row.get(i * m + j, domain.zero) for j in range(m)] for i in range(m)] for row in span.rows]

        def matmul(a, b):
            return [[sum((a[i][k] * b[k][j] for k in range(m)), domain.zero) for j in range(m)] for i in range(m)]

        n = span.dimension
        products: List[List[SparseVector]] = []
        for i in range(n):
            row = []
            for j in range(n):
                coords = span.coordinates(flat(matmul(basis[i], basis[j])))
                if coords is None:
                    raise ValidationError("Matrices do not span a subalgebra", {'i': i, 'j': j})
                row.append({k: c for k, c in enumerate(coords) if c})
            products.append(row)
        identity = [[domain.one if i == j else domain.zero for j in range(m)] for i in range(m)]
        unit = span.coordinates(flat(identity))
        if unit is None:
            raise ValidationError("The span does not contain the identity matrix")
        return cls(field, n, products, tuple(unit), labels if labels and len(labels) == n else None)

    def to_dict(self) -> Dict[str, Any]:
        fmt = self.field.format_scalar
        return {
            'field': self.field.to_dict(),
            'dimension': self.dimension,
            'unit': [fmt(c) for c in self.unit],
            'products': [[{str(k): fmt(c) for k, c in sorted(p.items())} for p in row] for row in self.products]
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FinDimAlgebra':
        field = Field.from_dict(data['field'])
        conv = lambda text: field.from_sympy(sympy.Rational(str(text))) if field.kind != 'extension' \
            else field.from_sympy(sympy.sympify(str(text)))
        products = [[{int(k): conv(v) for k, v in entry.items()} for entry in row] for row in data['products']]
        algebra = cls(field, int(data['dimension']), products, tuple(conv(c) for c in data['unit']))
        algebra.check_axioms()
        return algebra


@dataclass
class AlgebraIdeal:
    """A subspace of an algebra, kept in echelon form."""
    algebra: FinDimAlgebra
    span: Subspace

    @classmethod
    def spanned_by(cls, algebra: FinDimAlgebra, vectors: Sequence[Vector]) -> 'AlgebraIdeal':
        sparse = [algebra.sparse(v) for v in vectors]
        return cls(algebra, Subspace(algebra.dimension, algebra.domain, [v for v in sparse if v]))

    @property
    def dimension(self) -> int:
        return self.span.dimension

    @property
    def basis(self) -> List[Vector]:
        return [self.algebra.dense(row) for row in self.span.rows]

    def contains(self, x: Vector) -> bool:
        return self.span.contains(self.algebra.sparse(x))

    def is_two_sided(self) -> bool:
        A = self.algebra
        for v in self.basis:
            for i in range(A.dimension):
                b = A.basis_vector(i)
                if not self.contains(A.mul(b, v)) or not self.contains(A.mul(v, b)):
                    return False
        return True

    def product(self, other: 'AlgebraIdeal') -> 'AlgebraIdeal':
        A = self.algebra
        return AlgebraIdeal.spanned_by(A, [A.mul(u, v) for u in self.basis for v in other.basis])

    def nilpotency_index(self) -> Optional[int]:
        """Smallest k with N^k = 0, or None if N is not nilpotent."""
        if self.dimension == 0:
            return 1
        current = self
        for k in range(1, self.algebra.dimension + 2):
            check_cancelled()
            if current.dimension == 0:
                return k
            nxt = current.product(self)
            if nxt.dimension == current.dimension:
                return None
            current = nxt
        return None

    def is_nilpotent(self) -> bool:
        return self.nilpotency_index() is not None


def _require_trace_form(A: FinDimAlgebra):
    p = A.field.characteristic
    if p and p <= A.dimension:
        raise UnsupportedCharacteristicError(
            f"Trace-form radical needs characteristic 0 or p > dim A (p={p}, dim={A.dimension})"
        )


def radical(A: FinDimAlgebra) -> AlgebraIdeal:
    """
    Jacobson radical as the kernel of the trace form (a, b) -> tr(L_{ab}).

    Valid in characteristic 0 and for p > dim A; the result is checked to be
    a nilpotent two-sided ideal.
    """
    _require_trace_form(A)
    n = A.dimension
    t = [A.trace(A.basis_vector(k)) for k in range(n)]
    form = []
    for i in range(n):
        row = []
        for j in range(n):
            value = A.domain.zero
            for k, c in A.products[i][j].items():
                if t[k]:
                    value += c * t[k]
            row.append(value)
        form.append(row)
    kernel = solve_linear(form, [A.domain.zero] * n, A.domain, ncols=n).kernel if n else []
    J = AlgebraIdeal.spanned_by(A, [tuple(v) for v in kernel])
    if not J.is_two_sided():
        raise InternalError("Trace-form kernel is not a two-sided ideal")
    if not J.is_nilpotent():
        raise InternalError("Trace-form kernel is not nilpotent")
    debug_log("Radical computed", dim=n, radical_dim=J.dimension)
    return J


def lift_idempotent(A: FinDimAlgebra, N: AlgebraIdeal, e0: Vector) -> Vector:
    """Lift an idempotent modulo the nilpotent ideal N by iterating e -> 3e^2 - 2e^3."""
    if not N.is_nilpotent():
        raise PreconditionError("Ideal is not nilpotent")
    if not N.contains(A.sub(A.mul(e0, e0), e0)):
        raise PreconditionError("Element is not idempotent modulo the ideal")
    three, two = A.field.scalar(3), A.field.scalar(2)
    e = tuple(e0)
    for _ in range(A.dimension + 2):
        check_cancelled()
        e2 = A.mul(e, e)
        if e2 == e:
            if not N.contains(A.sub(e, e0)):
                raise InternalError("Lifted idempotent left the coset of e0")
            return e
        e3 = A.mul(e2, e)
        e = A.sub(A.scale(three, e2), A.scale(two, e3))
    raise InternalError("Idempotent lifting did not converge")


# ---------------------------------------------------------------------------
# Semisimple quotient and idempotent splitting
# ---------------------------------------------------------------------------

@dataclass
class QuotientAlgebra:
    """A/J realised on the complement of J's pivot columns."""
    algebra: FinDimAlgebra
    ideal: AlgebraIdeal
    quotient: FinDimAlgebra
    complement: List[int]

    def project(self, x: Vector) -> Vector:
        reduced = self.ideal.span.reduce(self.algebra.sparse(x))
        return tuple(reduced.get(c, self.algebra.domain.zero) for c in self.complement)

    def lift(self, s: Vector) -> Vector:
        out = list(self.algebra.zero())
        for c, value in zip(self.complement, s):
            out[c] = value
        return tuple(out)


def quotient_algebra(A: FinDimAlgebra, J: AlgebraIdeal) -> QuotientAlgebra:
    pivots = set(J.span.pivots)
    complement = [c for c in range(A.dimension) if c not in pivots]
    helper = QuotientAlgebra(A, J, None, complement)
    products = []
    for a in complement:
        row = []
        for b in complement:
            image = helper.project(A.dense(A.products[a][b]))
            row.append({k: v for k, v in enumerate(image) if v})
        products.append(row)
    helper.quotient = FinDimAlgebra(A.field, len(complement), products, helper.project(A.one()))
    return helper


@dataclass
class CornerAlgebra:
    """eAe for an idempotent e, with its own basis and an embedding into A."""
    algebra: FinDimAlgebra
    idempotent: Vector
    corner: FinDimAlgebra
    span: Subspace

    def embed(self, c: Vector) -> Vector:
        return self.algebra.dense(self.span.combine(c))

    def restrict(self, x: Vector) -> Optional[Vector]:
        coords = self.span.coordinates(self.algebra.sparse(x))
        return tuple(coords) if coords is not None else None


def corner_algebra(A: FinDimAlgebra, e: Vector) -> CornerAlgebra:
    if not A.is_idempotent(e):
        raise PreconditionError("Corner algebra needs an idempotent")
    vectors = [A.sparse(A.mul(A.mul(e, A.basis_vector(i)), e)) for i in range(A.dimension)]
    span = Subspace(A.dimension, A.domain, [v for v in vectors if v])
    basis = [A.dense(row) for row in span.rows]
    products = []
    for x in basis:
        row = []
        for y in basis:
            coords = span.coordinates(A.sparse(A.mul(x, y)))
            row.append({k: c for k, c in enumerate(coords) if c})
        products.append(row)
    unit = span.coordinates(A.sparse(e)) if span.dimension else []
    corner = FinDimAlgebra(A.field, span.dimension, products, tuple(unit))
    return CornerAlgebra(A, tuple(e), corner, span)


def _as_poly(coeffs_low_high: Sequence[Any], field: Field) -> sympy.Poly:
    return sympy.Poly([field.to_sympy(c) for c in reversed(coeffs_low_high)], _T, domain=field.domain)


def _poly_coeffs(poly: sympy.Poly, field: Field) -> List[Any]:
    """Coefficients high to low as field elements."""
    return [field.from_sympy(c) for c in poly.all_coeffs()]


def minimal_polynomial(S: FinDimAlgebra, eps: Vector, c: Vector) -> List[Any]:
    """Monic minimal polynomial (low to high) of c in the corner with unit eps."""
    powers = [tuple(eps)]
    current = tuple(eps)
    for _ in range(S.dimension + 1):
        current = S.mul(current, c)
        matrix = [[p[i] for p in powers] for i in range(S.dimension)]
        solution = solve_linear(matrix, list(current), S.domain, ncols=len(powers))
        if solution.consistent:
            return [-a for a in solution.solution] + [S.domain.one]
        powers.append(current)
    raise InternalError("Minimal polynomial search exceeded the algebra dimension")


def _evaluate(S: FinDimAlgebra, coeffs_high_low: Sequence[Any], c: Vector, eps: Vector) -> Vector:
    acc = S.zero()
    for a in coeffs_high_low:
        acc = S.add(S.mul(acc, c), S.scale(a, eps))
    return acc


@dataclass
class SplitAttempt:
    """Outcome of looking for a nontrivial idempotent inside a corner."""
    idempotent: Optional[Vector] = None
    division: bool = False
    witness: Optional[List[str]] = None


def _candidate_elements(S: FinDimAlgebra, corner_basis: List[Vector], rng: random.Random, attempts: int):
    for b in corner_basis:
        yield b
    for a, b in itertools.combinations(corner_basis, 2):
        yield S.add(a, b)
    for _ in range(attempts):
        coeffs = [S.field.scalar(rng.randint(-3, 3)) for _ in corner_basis]
        out = S.zero()
        for k, b in zip(coeffs, corner_basis):
            out = S.add(out, S.scale(k, b))
        yield out


def split_corner(S: FinDimAlgebra, eps: Vector, rng: random.Random,
                 attempts: Optional[int] = None) -> SplitAttempt:
    """
    Find a nontrivial idempotent of the semisimple corner eps*S*eps, or
    certify the corner is a division algebra.

    Certification only covers commutative corners (a field generated by one
    element). Noncommutative corners over a finite field always split; over
    QQ or a number field a failed search raises UnsupportedAlgebraError.
    """
    attempts = Config.MFG_IDEMPOTENT_SEARCH_ATTEMPTS if attempts is None else attempts
    vectors = [S.sparse(S.mul(S.mul(eps, S.basis_vector(i)), eps)) for i in range(S.dimension)]
    span = Subspace(S.dimension, S.domain, [v for v in vectors if v])
    d = span.dimension
    if d == 1:
        return SplitAttempt(division=True, witness=['1'])
    corner_basis = [S.dense(row) for row in span.rows]
    commutative = all(S.mul(a, b) == S.mul(b, a) for a, b in itertools.combinations(corner_basis, 2))

    for c in _candidate_elements(S, corner_basis, rng, attempts):
        check_cancelled()
        debug_count('idempotent_candidates')
        mu = minimal_polynomial(S, eps, c)
        poly = _as_poly(mu, S.field)
        _, factors = poly.factor_list()
        if len(factors) > 1:
            g = factors[0][0] ** factors[0][1]
            h = poly.exquo(g)
            _, t, _ = g.gcdex(h)
            e_poly = (t * h).rem(poly)
            e = _evaluate(S, _poly_coeffs(e_poly, S.field), c, eps)
            if not S.is_idempotent(e) or S.is_zero(e) or e == tuple(eps):
                raise InternalError("Chinese-remainder idempotent is not a proper idempotent")
            return SplitAttempt(idempotent=e)
        if commutative and len(mu) - 1 == d and factors and factors[0][1] == 1:
            return SplitAttempt(division=True, witness=[str(poly.as_expr())])

    if S.field.characteristic == 0 and not commutative:
        raise UnsupportedAlgebraError(
            "Could not decide whether a noncommutative semisimple corner is a division algebra",
            {'corner_dimension': d, 'attempts': attempts}
        )
    raise UnsupportedAlgebraError(
        "Idempotent search exhausted its attempt budget",
        {'corner_dimension': d, 'attempts': attempts}
    )


def _semisimple_primitive_idempotents(S: FinDimAlgebra, rng: random.Random) -> List[Vector]:
    if S.dimension == 0:
        return []
    pending = [S.one()]
    done: List[Vector] = []
    while pending:
        eps = pending.pop(0)
        attempt = split_corner(S, eps, rng)
        if attempt.division:
            done.append(eps)
        else:
            e1 = attempt.idempotent
            pending[:0] = [e1, S.sub(eps, e1)]
    return done


def primitive_decomposition(A: FinDimAlgebra, seed: int = 0) -> List[Vector]:
    """
    Complete set of primitive orthogonal idempotents of A.

    Idempotents of A/J are found by splitting corners with minimal
    polynomials, then lifted one at a time inside the complement of the
    idempotents already lifted.
    """
    if A.dimension == 0:
        return []
    with DebugTimer(f"primitive decomposition (dim {A.dimension})"):
        J = radical(A)
        Q = quotient_algebra(A, J)
        rng = random.Random(seed)
        quotient_idempotents = _semisimple_primitive_idempotents(Q.quotient, rng)

        result: List[Vector] = []
        remaining = A.one()
        for eps in quotient_idempotents[:-1]:
            c = A.mul(A.mul(remaining, Q.lift(eps)), remaining)
            e = lift_idempotent(A, J, c)
            result.append(e)
            remaining = A.sub(remaining, e)
        if quotient_idempotents:
            result.append(remaining)

    check_primitive_decomposition(A, result, seed)
    logger.info(f"Primitive decomposition: dim={A.dimension}, radical={J.dimension}, idempotents={len(result)}")
    return result


def check_primitive_decomposition(A: FinDimAlgebra, idempotents: List[Vector], seed: int = 0) -> None:
    """Raise InternalError unless the idempotents are orthogonal, sum to 1 and have local corners."""
    total = A.zero()
    for i, e in enumerate(idempotents):
        total = A.add(total, e)
        for j, f in enumerate(idempotents):
            expected = e if i == j else A.zero()
            if A.mul(e, f) != expected:
                raise InternalError("Idempotents are not orthogonal", {'i': i, 'j': j})
    if idempotents and total != A.one():
        raise InternalError("Idempotents do not sum to 1")
    for i, e in enumerate(idempotents):
        if not is_nc_local(corner_algebra(A, e).corner, seed):
            raise InternalError("Idempotent is not primitive: its corner algebra is not local", {'index': i})


def is_nc_local(A: FinDimAlgebra, seed: int = 0) -> bool:
    """True when A/J is a division algebra (A has no idempotents besides 0 and 1)."""
    if A.dimension == 0:
        return False
    J = radical(A)
    Q = quotient_algebra(A, J)
    return split_corner(Q.quotient, Q.quotient.one(), random.Random(seed)).division


def brute_force_idempotents(A: FinDimAlgebra) -> List[Vector]:
    """All idempotents of a small algebra over GF(p), by enumeration."""
    p = A.field.characteristic
    if not p:
        raise UnsupportedCharacteristicError("Brute-force enumeration needs a prime field")
    if A.dimension > Config.MFG_BRUTE_FORCE_MAX_DIM:
        raise PreconditionError(
            f"Algebra of dimension {A.dimension} is too large for enumeration",
            {'max_dimension': Config.MFG_BRUTE_FORCE_MAX_DIM}
        )
    scalars = [A.field.scalar(k) for k in range(p)]
    found = []
    for coeffs in itertools.product(scalars, repeat=A.dimension):
        check_cancelled()
        if A.is_idempotent(coeffs):
            found.append(tuple(coeffs))
    return found


# ---------------------------------------------------------------------------
# Small algebras used for cross-checks
# ---------------------------------------------------------------------------

def _unit_matrix(m: int, i: int, j: int, domain) -> List[List[Any]]:
    return [[domain.one if (r, c) == (i, j) else domain.zero for c in range(m)] for r in range(m)]


def full_matrix_algebra(field: Field, m: int) -> FinDimAlgebra:
    mats = [_unit_matrix(m, i, j, field.domain) for i in range(m) for j in range(m)]
    return FinDimAlgebra.from_matrices(field, mats)


def upper_triangular_algebra(field: Field, m: int) -> FinDimAlgebra:
    mats = [_unit_matrix(m, i, j, field.domain) for i in range(m) for j in range(i, m)]
    return FinDimAlgebra.from_matrices(field, mats)


def truncated_polynomial_algebra(field: Field, m: int) -> FinDimAlgebra:
    """k[t]/(t^m): local, radical of dimension m - 1."""
    domain = field.domain
    products = [[({i + j: domain.one} if i + j < m else {}) for j in range(m)] for i in range(m)]
    unit = tuple(domain.one if k == 0 else domain.zero for k in range(m))
    return FinDimAlgebra(field, m, products, unit)


def monogenic_algebra(field: Field, coeffs_low_high: Sequence[int]) -> FinDimAlgebra:
    """k[t]/(q(t)) for a monic q given by integer coefficients (low to high)."""
    domain = field.domain
    q = [field.scalar(c) for c in coeffs_low_high]
    m = len(q) - 1
    if m < 1 or q[-1] != domain.one:
        raise ValidationError("Need a monic polynomial of positive degree")

    def reduce(vec):
        vec = list(vec)
        for k in range(len(vec) - 1, m - 1, -1):
            c = vec[k]
            if c:
                for i in range(m + 1):
                    vec[k - m + i] -= c * q[i]
        return vec[:m]

    products = []
    for i in range(m):
        row = []
        for j in range(m):
            vec = [domain.zero] * (2 * m)
            vec[i + j] = domain.one
            row.append({k: c for k, c in enumerate(reduce(vec)) if c})
        products.append(row)
    unit = tuple(domain.one if k == 0 else domain.zero for k in range(m))
    return FinDimAlgebra(field, m, products, unit)


def direct_product(first: FinDimAlgebra, second: FinDimAlgebra) -> FinDimAlgebra:
    n1, n2 = first.dimension, second.dimension
    products = []
    for i in range(n1 + n2):
        row = []
        for j in range(n1 + n2):
            if i < n1 and j < n1:
                row.append(dict(first.products[i][j]))
            elif i >= n1 and j >= n1:
                row.append({k + n1: c for k, c in second.products[i - n1][j - n1].items()})
            else:
                row.append({})
        products.append(row)
    return FinDimAlgebra(first.field, n1 + n2, products, tuple(first.unit) + tuple(second.unit))


def group_algebra(field: Field, table: Sequence[Sequence[int]]) -> FinDimAlgebra:
    n = len(table)
    products = [[{table[i][j]: field.one} for j in range(n)] for i in range(n)]
    identity = next(g for g in range(n) if all(table[g][h] == h for h in range(n)))
    unit = tuple(field.one if k == identity else field.zero for k in range(n))
    return FinDimAlgebra(field, n, products, unit)


def quaternion_algebra(field: Field, a: int = -1, b: int = -1) -> FinDimAlgebra:
    """(a, b)_k with basis 1, i, j, ij; a division algebra over QQ for a = b = -1."""
    k = field.scalar
    one = field.one
    # i^2 = a, j^2 = b, ij = -ji
    table = {
        (0, 0): {0: one}, (0, 1): {1: one}, (0, 2): {2: one}, (0, 3): {3: one},
        (1, 0): {1: one}, (1, 1): {0: k(a)}, (1, 2): {3: one}, (1, 3): {2: k(a)},
        (2, 0): {2: one}, (2, 1): {3: -one}, (2, 2): {0: k(b)}, (2, 3): {1: -k(b)},
        (3, 0): {3: one}, (3, 1): {2: -k(a)}, (3, 2): {1: k(b)}, (3, 3): {0: -k(a) * k(b)},
    }
    products = [[table[(i, j)] for j in range(4)] for i in range(4)]
    return FinDimAlgebra(field, 4, products, (one, field.zero, field.zero, field.zero))


def algebra_corpus(field: Field) -> Dict[str, FinDimAlgebra]:
    """Named test algebras with known numbers of primitive idempotents."""
    corpus = {
        'k': truncated_polynomial_algebra(field, 1),
        'k[t]/t^3': truncated_polynomial_algebra(field, 3),
        'k x k': direct_product(truncated_polynomial_algebra(field, 1), truncated_polynomial_algebra(field, 1)),
        'upper triangular 2': upper_triangular_algebra(field, 2),
        'upper triangular 3': upper_triangular_algebra(field, 3),
        'M_2': full_matrix_algebra(field, 2),
        'k[t]/t^2 x k': direct_product(truncated_polynomial_algebra(field, 2), truncated_polynomial_algebra(field, 1)),
        'k[C_2]': group_algebra(field, [[0, 1], [1, 0]]),
    }
    return corpus


EXPECTED_PRIMITIVE_COUNTS = {
    'k': 1,
    'k[t]/t^3': 1,
    'k x k': 2,
    'upper triangular 2': 2,
    'upper triangular 3': 3,
    'M_2': 2,
    'k[t]/t^2 x k': 2,
    'k[C_2]': 2,
}
