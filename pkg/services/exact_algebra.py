"""
Exact arithmetic: fields, weighted-homogeneous polynomial rings and the
sparse linear algebra every other service is built on.

Scalars are sympy domain elements (QQ, GF(p) or a simple algebraic extension
of QQ) and polynomials are sympy ``PolyElement``s. Nothing here ever touches
a float.
"""
import logging
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from tokenize import TokenError
from typing import Any, Dict, List, Optional, Sequence, Tuple

import sympy
from sympy import GF, QQ
from sympy.parsing.sympy_parser import parse_expr, standard_transformations
from sympy.polys.matrices import DomainMatrix
from sympy.polys.polyerrors import CoercionFailed, GeneratorsNeeded, PolynomialError
from sympy.polys.rings import PolyElement, PolyRing

from services.debug import debug_count, debug_log
from services.errors import (
    DimensionMismatchError, MixedRingError, ParseError,
    UnsupportedCharacteristicError, ValidationError
)
from services.job_manager import check_cancelled

logger = logging.getLogger(__name__)

FIELD_KINDS = ('rationals', 'prime', 'extension')

# Sparse vector: coordinate index -> nonzero domain element
SparseVector = Dict[int, Any]

_POLY_TEXT = re.compile(r"^[A-Za-z0-9_\s+\-*/^()]*$")


@dataclass(frozen=True)
class Field:
    """Coefficient field: QQ, GF(p) or QQ adjoined an algebraic number."""
    kind: str = 'rationals'
    p: int = 0
    adjoin: str = ''

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValidationError(f"Unknown field kind '{self.kind}'", {'allowed': list(FIELD_KINDS)})
        if self.kind == 'prime' and not sympy.isprime(self.p):
            raise ValidationError(f"GF(p) needs a prime p, got {self.p}")
        if self.kind == 'extension' and not self.adjoin:
            raise ValidationError("Extension field needs an algebraic generator to adjoin")

    @classmethod
    def rationals(cls) -> 'Field':
        return cls('rationals')

    @classmethod
    def prime(cls, p: int) -> 'Field':
        return cls('prime', p=p)

    @classmethod
    def extension(cls, adjoin: str) -> 'Field':
        return cls('extension', adjoin=adjoin)

    @cached_property
    def domain(self):
        if self.kind == 'rationals':
            return QQ
        if self.kind == 'prime':
            return GF(self.p)
        try:
            generator = sympy.sympify(self.adjoin)
            return QQ.algebraic_field(generator)
        except (sympy.SympifyError, TypeError, ValueError, NotImplementedError) as e:
            raise ValidationError(f"Cannot adjoin '{self.adjoin}' to QQ: {e}")

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == 'prime' else 0

    @property
    def zero(self):
        return self.domain.zero

    @property
    def one(self):
        return self.domain.one

    def scalar(self, n: int):
        return self.domain.convert(n)

    def from_sympy(self, value):
        """Convert a sympy number into this field; raises ParseError if it does not belong."""
        if self.kind == 'prime':
            try:
                r = sympy.Rational(value)
            except (TypeError, ValueError):
                raise ParseError(f"'{value}' is not an element of GF({self.p})")
            if r.q % self.p == 0:
                raise ParseError(f"Denominator of {r} vanishes in GF({self.p})")
            return self.domain(int(r.p)) / self.domain(int(r.q))
        try:
            return self.domain.from_sympy(value)
        except (CoercionFailed, TypeError, ValueError):
            raise ParseError(f"'{value}' is not an element of {self.describe()}")

    def to_sympy(self, c):
        if self.kind == 'prime':
            return sympy.Integer(int(self.domain.to_sympy(c)) % self.p)
        return self.domain.to_sympy(c)

    def format_scalar(self, c) -> str:
        return str(self.to_sympy(c))

    def describe(self) -> str:
        if self.kind == 'rationals':
            return 'QQ'
        if self.kind == 'prime':
            return f'GF({self.p})'
        return f'QQ<{self.adjoin}>'

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'kind': self.kind}
        if self.kind == 'prime':
            data['p'] = self.p
        if self.kind == 'extension':
            data['adjoin'] = self.adjoin
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Field':
        if not isinstance(data, dict) or 'kind' not in data:
            raise ParseError("Field must be an object with a 'kind'")
        return cls(kind=data['kind'], p=int(data.get('p', 0)), adjoin=str(data.get('adjoin', '')))


@dataclass(frozen=True)
class GradedRing:
    """
    Q = k[x_1..x_n] with positive integer weights and a homogeneous potential f.

    ``potential`` is stored in canonical text form so two rings compare equal
    exactly when they are the same ring.
    """
    field: Field
    variables: Tuple[str, ...]
    weights: Tuple[int, ...]
    potential: str

    def __post_init__(self):
        if not self.variables:
            raise ValidationError("A graded ring needs at least one variable")
        if len(self.variables) != len(self.weights):
            raise ValidationError("Each variable needs exactly one weight",
                                  {'variables': list(self.variables), 'weights': list(self.weights)})
        if len(set(self.variables)) != len(self.variables):
            raise ValidationError("Variable names must be distinct")
        for name in self.variables:
            if not re.fullmatch(r'[A-Za-z][A-Za-z0-9_]*', name):
                raise ValidationError(f"Invalid variable name '{name}'")
        if any((not isinstance(w, int)) or w <= 0 for w in self.weights):
            raise ValidationError("Weights must be positive integers", {'weights': list(self.weights)})
        f = self.f
        if not f:
            raise ValidationError("The potential must be nonzero")
        degree = homogeneous_degree(f, self)
        if degree is None:
            raise ValidationError(f"Potential '{self.potential}' is not weighted-homogeneous")
        if degree < 1:
            raise ValidationError("The potential must have positive degree")
        canonical = format_polynomial(f, self)
        if canonical != self.potential:
            object.__setattr__(self, 'potential', canonical)

    @classmethod
    def create(cls, field: Field, variables: Sequence[str], weights: Sequence[int], potential: str) -> 'GradedRing':
        return cls(field, tuple(variables), tuple(int(w) for w in weights), potential)

    @cached_property
    def poly_ring(self) -> PolyRing:
        return PolyRing(','.join(self.variables), self.field.domain)

    @cached_property
    def f(self) -> PolyElement:
        return parse_polynomial(self.potential, self)

    @cached_property
    def df(self) -> int:
        return homogeneous_degree(self.f, self)

    @property
    def ngens(self) -> int:
        return len(self.variables)

    @property
    def gens(self) -> Tuple[PolyElement, ...]:
        return tuple(self.poly_ring.gens)

    @property
    def zero(self) -> PolyElement:
        return self.poly_ring.zero

    @property
    def one(self) -> PolyElement:
        return self.poly_ring.one

    def constant(self, c) -> PolyElement:
        return self.poly_ring.ground_new(c)

    def monomial(self, exponents: Tuple[int, ...], coeff=None) -> PolyElement:
        coeff = self.field.one if coeff is None else coeff
        return self.poly_ring.from_dict({tuple(exponents): coeff})

    def parse(self, text: str) -> PolyElement:
        return parse_polynomial(text, self)

    def format(self, p: PolyElement) -> str:
        return format_polynomial(p, self)

    def with_potential(self, potential: str) -> 'GradedRing':
        return GradedRing(self.field, self.variables, self.weights, potential)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'field': self.field.to_dict(),
            'variables': list(self.variables),
            'weights': list(self.weights),
            'potential': self.potential
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GradedRing':
        try:
            return cls.create(
                Field.from_dict(data['field']),
                [str(v) for v in data['variables']],
                [int(w) for w in data['weights']],
                str(data['potential'])
            )
        except (KeyError, TypeError) as e:
            raise ParseError(f"Malformed ring description: {e}")


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def parse_polynomial(text: str, ring: GradedRing) -> PolyElement:
    """Parse ``3*x^2*y - 1/2*z`` style text into an element of ``ring``."""
    if not isinstance(text, str) or not text.strip() or not _POLY_TEXT.match(text) or "__" in text:
        raise ParseError(f"Malformed polynomial text: {text!r}")
    symbols = {name: sympy.Symbol(name) for name in ring.variables}
    try:
        expr = parse_expr(text.replace('^', '**'), local_dict=symbols,
                          transformations=standard_transformations, evaluate=True)
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError, TokenError) as e:
        raise ParseError(f"Malformed polynomial text {text!r}: {e}")
    if not isinstance(expr, sympy.Expr):
        raise ParseError(f"Malformed polynomial text: {text!r}")
    if expr.has(sympy.Float):
        raise ParseError(f"Floating point coefficients are not allowed: {text!r}")
    unknown = expr.free_symbols - set(symbols.values())
    if unknown:
        raise ParseError(f"Unknown symbols {sorted(str(s) for s in unknown)} in {text!r}")
    try:
        poly = sympy.Poly(sympy.expand(expr), *symbols.values())
    except (PolynomialError, GeneratorsNeeded) as e:
        raise ParseError(f"Not a polynomial: {text!r} ({e})")
    terms = {}
    for monom, coeff in poly.as_dict(native=False).items():
        value = ring.field.from_sympy(coeff)
        if value:
            terms[tuple(monom)] = value
    return ring.poly_ring.from_dict(terms)


def weighted_degree(monom: Tuple[int, ...], weights: Sequence[int]) -> int:
    return sum(w * e for w, e in zip(weights, monom))


def homogeneous_degree(p: PolyElement, ring: GradedRing) -> Optional[int]:
    """Weighted degree of a nonzero homogeneous polynomial, else None."""
    degrees = {weighted_degree(m, ring.weights) for m in p.keys()}
    if len(degrees) != 1:
        return None
    return degrees.pop()


def is_homogeneous(p: PolyElement, ring: GradedRing, degree: Optional[int] = None) -> bool:
    """True for zero, or for a polynomial whose terms all have the given weighted degree."""
    if not p:
        return True
    d = homogeneous_degree(p, ring)
    if d is None:
        return False
    return degree is None or d == degree


def _term_key(monom: Tuple[int, ...], weights: Sequence[int]):
    return (-weighted_degree(monom, weights), tuple(-e for e in monom))


def format_polynomial(p: PolyElement, ring: GradedRing) -> str:
    """Canonical text: terms by descending weighted degree, then descending lex."""
    if not p:
        return '0'
    field = ring.field
    pieces: List[Tuple[bool, str]] = []
    for monom in sorted(p.keys(), key=lambda m: _term_key(m, ring.weights)):
        coeff = p[monom]
        mono = '*'.join(name if e == 1 else f'{name}^{e}'
                        for name, e in zip(ring.variables, monom) if e)
        if field.kind == 'rationals':
            r = field.to_sympy(coeff)
            negative = r < 0
            magnitude = -r if negative else r
            if not mono:
                text = str(magnitude)
            elif magnitude == 1:
                text = mono
            else:
                text = f'{magnitude}*{mono}'
        else:
            negative = False
            scalar = field.format_scalar(coeff)
            if field.kind == 'extension' and not re.fullmatch(r'\d+(/\d+)?', scalar):
                scalar = f'({scalar})'
            if not mono:
                text = scalar
            elif coeff == field.one:
                text = mono
            else:
                text = f'{scalar}*{mono}'
        pieces.append((negative, text))

    first_negative, first_text = pieces[0]
    out = ('-' if first_negative else '') + first_text
    for negative, text in pieces[1:]:
        out += (' - ' if negative else ' + ') + text
    return out


def poly_arith(a: PolyElement, b: PolyElement, op: str = 'add') -> PolyElement:
    """Exact ring operation; operands must share a ring."""
    if a.ring != b.ring:
        raise MixedRingError("Polynomials belong to different rings")
    if op == 'add':
        return a + b
    if op == 'sub':
        return a - b
    if op == 'mul':
        return a * b
    raise ValidationError(f"Unknown polynomial operation '{op}'")


def substitute(p: PolyElement, images: Sequence[PolyElement], target: PolyRing,
               source_field: Optional[Field] = None, target_field: Optional[Field] = None) -> PolyElement:
    """Evaluate ``p`` at ``images`` (one per variable) inside ``target``."""
    result = target.zero
    same_domain = source_field is None or target_field is None or source_field == target_field
    for monom, coeff in p.items():
        c = coeff if same_domain else target_field.from_sympy(source_field.to_sympy(coeff))
        term = target.ground_new(c)
        for image, e in zip(images, monom):
            if e:
                term = term * image ** e
        result += term
    return result


def constant_term(p: PolyElement):
    return p.get((0,) * p.ring.ngens, p.ring.domain.zero)


@lru_cache(maxsize=None)
def monomials_of_degree(weights: Tuple[int, ...], degree: int) -> Tuple[Tuple[int, ...], ...]:
    """All exponent vectors of the given weighted degree, in descending lex order."""
    if degree < 0:
        return ()
    if not weights:
        return ((),) if degree == 0 else ()
    w, rest = weights[0], weights[1:]
    out = []
    for e in range(degree // w, -1, -1):
        for tail in monomials_of_degree(rest, degree - e * w):
            out.append((e,) + tail)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(weights: Tuple[int, ...], degree: int) -> Dict[Tuple[int, ...], int]:
    return {m: i for i, m in enumerate(monomials_of_degree(weights, degree))}


def homogeneous_coordinates(p: PolyElement, ring: GradedRing, degree: int) -> SparseVector:
    """Coordinates of a homogeneous polynomial in the monomial basis of Q_degree."""
    index = monomial_index(ring.weights, degree)
    out: SparseVector = {}
    for monom, coeff in p.items():
        if monom not in index:
            raise ValidationError(f"Polynomial is not homogeneous of degree {degree}",
                                  {'polynomial': format_polynomial(p, ring)})
        out[index[monom]] = coeff
    return out


# ---------------------------------------------------------------------------
# Linear algebra (thin layer over sympy's DomainMatrix)
# ---------------------------------------------------------------------------

@dataclass
class LinearSolution:
    """Result of ``solve_linear``: one particular solution (or None) plus a kernel basis."""
    solution: Optional[List[Any]]
    kernel: List[List[Any]]

    @property
    def consistent(self) -> bool:
        return self.solution is not None


def rref_sparse(rows: Dict[int, SparseVector], shape: Tuple[int, int], domain):
    """Reduced row echelon form of a sparse matrix; returns (rows dict, pivots)."""
    check_cancelled()
    clean = {}
    for i, row in rows.items():
        nz = {j: v for j, v in row.items() if v}
        if nz:
            clean[i] = nz
    if not clean:
        return {}, ()
    debug_count('rref')
    matrix = DomainMatrix(clean, shape, domain)
    reduced, pivots = matrix.rref()
    reduced_rows = reduced.to_sparse().rep
    return {i: dict(row) for i, row in reduced_rows.items()}, tuple(pivots)


def _kernel_from_rref(rows: Dict[int, SparseVector], pivots: Sequence[int], ncols: int, domain) -> List[SparseVector]:
    pivot_set = set(pivots)
    kernel = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vector = {free: domain.one}
        for r, col in enumerate(pivots):
            value = rows.get(r, {}).get(free)
            if value:
                vector[col] = -value
        kernel.append(vector)
    return kernel


def solve_sparse(rows: Dict[int, SparseVector], rhs: SparseVector, nrows: int, ncols: int, domain):
    """Solve a sparse system; returns (particular solution or None, kernel basis)."""
    augmented: Dict[int, SparseVector] = {}
    for i in range(nrows):
        row = dict(rows.get(i, {}))
        if rhs.get(i):
            row[ncols] = rhs[i]
        if row:
            augmented[i] = row
    reduced, pivots = rref_sparse(augmented, (nrows, ncols + 1), domain)
    debug_log("Solved linear system", rows=nrows, cols=ncols, rank=len(pivots))
    kernel = _kernel_from_rref(reduced, [c for c in pivots if c < ncols], ncols, domain)
    if ncols in pivots:
        return None, kernel
    solution: SparseVector = {}
    for r, col in enumerate(pivots):
        value = reduced.get(r, {}).get(ncols)
        if value:
            solution[col] = value
    return solution, kernel


def kernel_sparse(rows: Dict[int, SparseVector], nrows: int, ncols: int, domain) -> List[SparseVector]:
    reduced, pivots = rref_sparse(rows, (nrows, ncols), domain)
    return _kernel_from_rref(reduced, pivots, ncols, domain)


def solve_linear(matrix: Sequence[Sequence[Any]], rhs: Sequence[Any], domain, ncols: Optional[int] = None) -> LinearSolution:
    """
    Solve ``matrix * x = rhs`` exactly over ``domain``.

    Returns a particular solution (None when inconsistent) and a basis of the
    kernel of ``matrix``. ``ncols`` is required when the matrix has no rows.
    """
    nrows = len(matrix)
    if ncols is None:
        ncols = len(matrix[0]) if nrows else 0
    if any(len(row) != ncols for row in matrix) or len(rhs) != nrows:
        raise DimensionMismatchError("Matrix rows and right-hand side do not fit",
                                     {'rows': nrows, 'cols': ncols, 'rhs': len(rhs)})
    rows = {i: {j: v for j, v in enumerate(row) if v} for i, row in enumerate(matrix)}
    solution, kernel = solve_sparse(rows, {i: v for i, v in enumerate(rhs) if v}, nrows, ncols, domain)
    dense = lambda vec: [vec.get(j, domain.zero) for j in range(ncols)]
    return LinearSolution(
        solution=dense(solution) if solution is not None else None,
        kernel=[dense(k) for k in kernel]
    )


def matrix_rank(matrix: Sequence[Sequence[Any]], domain) -> int:
    rows = {i: {j: v for j, v in enumerate(row) if v} for i, row in enumerate(matrix)}
    ncols = len(matrix[0]) if matrix else 0
    return len(rref_sparse(rows, (len(matrix), ncols), domain)[1])


class Subspace:
    """
    Span of sparse vectors in k^dimension, kept as reduced echelon rows.

    Rows have a 1 in their pivot column and zeros in every other pivot column,
    so coordinates of a member are read off at the pivots.
    """

    def __init__(self, dimension: int, domain, vectors: Sequence[SparseVector] = ()):
        self.dimension_ambient = dimension
        self.domain = domain
        self.rows: List[SparseVector] = []
        self.pivots: List[int] = []
        if vectors:
            self._rebuild(list(vectors))

    def _rebuild(self, vectors: List[SparseVector]):
        reduced, pivots = rref_sparse({i: v for i, v in enumerate(vectors)},
                                      (len(vectors), self.dimension_ambient), self.domain)
        self.rows = [reduced.get(r, {}) for r in range(len(pivots))]
        self.pivots = list(pivots)

    @property
    def dimension(self) -> int:
        return len(self.pivots)

    def reduce(self, vector: SparseVector) -> SparseVector:
        """Remainder of ``vector`` after clearing every pivot column."""
        out = {j: v for j, v in vector.items() if v}
        for row, pivot in zip(self.rows, self.pivots):
            c = out.get(pivot)
            if c:
                for j, v in row.items():
                    value = out.get(j, self.domain.zero) - c * v
                    if value:
                        out[j] = value
                    else:
                        out.pop(j, None)
        return out

    def contains(self, vector: SparseVector) -> bool:
        return not self.reduce(vector)

    def coordinates(self, vector: SparseVector) -> Optional[List[Any]]:
        """Coefficients with respect to ``self.rows``, or None when outside the span."""
        if self.reduce(vector):
            return None
        return [vector.get(p, self.domain.zero) for p in self.pivots]

    def combine(self, coefficients: Sequence[Any]) -> SparseVector:
        out: SparseVector = {}
        for c, row in zip(coefficients, self.rows):
            if not c:
                continue
            for j, v in row.items():
                value = out.get(j, self.domain.zero) + c * v
                if value:
                    out[j] = value
                else:
                    out.pop(j, None)
        return out

    def extend(self, vectors: Sequence[SparseVector]) -> List[SparseVector]:
        """Add vectors; returns the ones that were independent of the span so far."""
        fresh = []
        probe = Subspace(self.dimension_ambient, self.domain)
        probe.rows, probe.pivots = list(self.rows), list(self.pivots)
        for v in vectors:
            remainder = probe.reduce(v)
            if remainder:
                fresh.append(v)
                probe._rebuild(probe.rows + [remainder])
        if fresh:
            self.rows, self.pivots = probe.rows, probe.pivots
        return fresh


def scale_vector(vector: SparseVector, c) -> SparseVector:
    if not c:
        return {}
    return {j: c * v for j, v in vector.items()}


def add_vectors(a: SparseVector, b: SparseVector, domain) -> SparseVector:
    out = dict(a)
    for j, v in b.items():
        value = out.get(j, domain.zero) + v
        if value:
            out[j] = value
        else:
            out.pop(j, None)
    return out


# ---------------------------------------------------------------------------
# Isolated singularity test
# ---------------------------------------------------------------------------

@dataclass
class SingularityReport:
    isolated: bool
    dimension: Optional[int]
    hilbert: List[int]
    basis: List[str]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'isolated': self.isolated,
            'tjurina_dimension': self.dimension,
            'hilbert': self.hilbert,
            'basis': self.basis
        }


def tjurina_algebra(ring: GradedRing, degree_limit: Optional[int] = None) -> SingularityReport:
    """
    Degree-by-degree dimensions of Q/(f, df/dx_1, ..., df/dx_n).

    The algebra is finite exactly when some run of max(weights) consecutive
    degrees is zero; the search stops at ``degree_limit`` (by default well past
    the socle degree n*d_f - 2*sum(w) of a finite Milnor algebra).
    """
    f = ring.f
    p = ring.field.characteristic
    if p and all(e % p == 0 for monom in f.keys() for e in monom):
        raise UnsupportedCharacteristicError(
            f"Characteristic {p} divides every exponent of f; the Jacobian criterion is unreliable"
        )
    generators = [(f, ring.df)]
    for x in ring.gens:
        partial = f.diff(x)
        if partial:
            generators.append((partial, homogeneous_degree(partial, ring)))

    wmax = max(ring.weights)
    if degree_limit is None:
        degree_limit = ring.ngens * ring.df + 2 * wmax
    hilbert: List[int] = []
    basis: List[str] = []
    zero_run = 0
    for d in range(degree_limit + 1):
        check_cancelled()
        monomials = monomials_of_degree(ring.weights, d)
        vectors = []
        for g, dg in generators:
            for m in monomials_of_degree(ring.weights, d - dg):
                vectors.append(homogeneous_coordinates(g * ring.monomial(m), ring, d))
        span = Subspace(len(monomials), ring.field.domain, vectors)
        pivots = set(span.pivots)
        free = [i for i in range(len(monomials)) if i not in pivots]
        hilbert.append(len(free))
        basis.extend(format_polynomial(ring.monomial(monomials[i]), ring) for i in free)
        zero_run = zero_run + 1 if not free else 0
        if zero_run >= wmax:
            while hilbert and hilbert[-1] == 0:
                hilbert.pop()
            return SingularityReport(True, sum(hilbert), hilbert, basis)
    return SingularityReport(False, None, hilbert, basis)


def is_isolated_singularity(ring: GradedRing) -> Tuple[bool, Optional[int]]:
    """Finite-dimensionality of the Tjurina algebra, with its dimension as witness."""
    report = tjurina_algebra(ring)
    logger.info(f"Isolated singularity check for f={ring.potential}: {report.isolated} (dim={report.dimension})")
    return report.isolated, report.dimension
