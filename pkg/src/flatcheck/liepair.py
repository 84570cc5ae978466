"""Lie algebra pairs over the rationals: filtrations, order, effectiveness.

Structure constants c^k_{ij} are exact Fractions with [x_i, x_j] =
sum_k c^k_{ij} x_k; the Jacobi identity is validated at construction so a
``LieAlgebra`` is trustworthy downstream.  All rank decisions use exact
Gaussian elimination, never floating point, because the order of a pair is
a small integer that must not depend on a rank tolerance.

The descending chain attached to a subalgebra h starts at h_0 = h and

    h_{i+1} = { v in h_i : [v, x] in h_i for every x in g }.

It either reaches 0 (the pair is effective; the number of steps is its
order) or stalls at a nonzero subspace, which is then the largest ideal of
g contained in h.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence, Tuple

Vector = Tuple[Fraction, ...]


class LiePairError(ValueError):
    """Invalid structure constants, representation law, or subalgebra."""


def _frac_rows(rows: Sequence[Sequence]) -> List[List[Fraction]]:
    return [[Fraction(x) for x in row] for row in rows]


def row_echelon(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    """Reduced row echelon form; returns only the nonzero rows."""
    mat = [list(r) for r in rows]
    if not mat:
        return []
    ncols = len(mat[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return [row for row in mat[:r]]


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(row_echelon(rows))


def in_span(vector: Sequence[Fraction], basis: Sequence[Sequence[Fraction]]) -> bool:
    if all(x == 0 for x in vector):
        return True
    if not basis:
        return False
    return rank(list(basis) + [list(vector)]) == rank(basis)


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> List[List[Fraction]]:
    """Basis of the solution space of rows . x = 0 (exact)."""
    ech = row_echelon(rows)
    pivots = []
    for row in ech:
        pivots.append(next(i for i, x in enumerate(row) if x != 0))
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for row, p in zip(ech, pivots):
            vec[p] = -row[f]
        basis.append(vec)
    return basis


class LieAlgebra:
    """Finite-dimensional Lie algebra given by exact structure constants."""

    def __init__(self, dim: int, brackets: dict[tuple[int, int], Sequence] | None = None,
                 validate: bool = True):
        """``brackets[(i, j)]`` holds [x_i, x_j] as a coefficient vector, i < j."""
        self.dim = dim
        self.c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        if brackets:
            for (i, j), coeffs in brackets.items():
                if not 0 <= i < j < dim:
                    raise LiePairError(f"bracket key ({i}, {j}) must satisfy 0 <= i < j < dim")
                vec = [Fraction(x) for x in coeffs]
                if len(vec) != dim:
                    raise LiePairError(f"bracket ({i}, {j}) has {len(vec)} coefficients, expected {dim}")
                for k in range(dim):
                    self.c[i][j][k] = vec[k]
                    self.c[j][i][k] = -vec[k]
        if validate:
            self._validate_jacobi()

    def bracket(self, v: Sequence[Fraction], w: Sequence[Fraction]) -> List[Fraction]:
        out = [Fraction(0)] * self.dim
        for i, vi in enumerate(v):
            if vi == 0:
                continue
            for j, wj in enumerate(w):
                if wj == 0:
                    continue
                cij = self.c[i][j]
                coeff = vi * wj
                for k in range(self.dim):
                    if cij[k]:
                        out[k] += coeff * cij[k]
        return out

    def basis_vector(self, i: int) -> List[Fraction]:
        v = [Fraction(0)] * self.dim
        v[i] = Fraction(1)
        return v

    def _validate_jacobi(self) -> None:
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(j + 1, self.dim):
                    ei, ej, ek = (self.basis_vector(t) for t in (i, j, k))
                    total = [a + b + c for a, b, c in zip(
                        self.bracket(self.bracket(ei, ej), ek),
                        self.bracket(self.bracket(ej, ek), ei),
                        self.bracket(self.bracket(ek, ei), ej))]
                    if any(total):
                        raise LiePairError(
                            f"Jacobi identity fails on basis triple ({i}, {j}, {k})")


class Subalgebra:
    """A subalgebra presented by a linearly independent basis in coordinates."""

    def __init__(self, algebra: LieAlgebra, basis: Sequence[Sequence], validate: bool = True):
        self.algebra = algebra
        self.basis = _frac_rows(basis)
        for row in self.basis:
            if len(row) != algebra.dim:
                raise LiePairError("subalgebra basis vectors must have ambient dimension")
        if self.basis and rank(self.basis) != len(self.basis):
            raise LiePairError("subalgebra basis is linearly dependent")
        if validate:
            self._validate_closed()

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, vector: Sequence[Fraction]) -> bool:
        return in_span(vector, self.basis)

    def _validate_closed(self) -> None:
        for a in self.basis:
            for b in self.basis:
                if not self.contains(self.algebra.bracket(a, b)):
                    raise LiePairError("subalgebra basis is not closed under the bracket")


class Representation:
    """Matrices rho(b) for each basis vector b of a Lie algebra h."""

    def __init__(self, algebra: LieAlgebra, matrices: Sequence[Sequence[Sequence]],
                 validate: bool = True):
        self.algebra = algebra
        self.matrices = [_frac_rows(m) for m in matrices]
        if len(self.matrices) != algebra.dim:
            raise LiePairError(
                f"need one matrix per basis vector ({algebra.dim}), got {len(self.matrices)}")
        self.space_dim = len(self.matrices[0]) if self.matrices else 0
        for m in self.matrices:
            if len(m) != self.space_dim or any(len(row) != self.space_dim for row in m):
                raise LiePairError("representation matrices must be square and equally sized")
        if validate:
            self._validate_law()

    def apply(self, v: Sequence[Fraction]) -> List[List[Fraction]]:
        out = [[Fraction(0)] * self.space_dim for _ in range(self.space_dim)]
        for coeff, mat in zip(v, self.matrices):
            if coeff == 0:
                continue
            for r in range(self.space_dim):
                for c in range(self.space_dim):
                    out[r][c] += coeff * mat[r][c]
        return out

    def _validate_law(self) -> None:
        d = self.algebra.dim
        for i in range(d):
            for j in range(i + 1, d):
                lhs = self.apply(self.algebra.bracket(
                    self.algebra.basis_vector(i), self.algebra.basis_vector(j)))
                a, b = self.matrices[i], self.matrices[j]
                comm = _mat_sub(_mat_mul(a, b), _mat_mul(b, a))
                if lhs != comm:
                    raise LiePairError(
                        f"representation law fails on basis pair ({i}, {j})")

    def is_faithful(self) -> bool:
        rows = []
        for mat in self.matrices:
            rows.append([x for row in mat for x in row])
        # kernel of h -> gl(W) as a linear map on coefficients
        cols = list(map(list, zip(*rows))) if rows else []
        return len(nullspace(cols, self.algebra.dim)) == 0 if cols else self.algebra.dim == 0


def _mat_mul(a, b):
    size = len(a)
    return [[sum(a[i][t] * b[t][j] for t in range(size)) for j in range(size)]
            for i in range(size)]


def _mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


# --- filtration, order, effectiveness ----------------------------------------

def filtration_of(g: LieAlgebra, h: Subalgebra) -> List[Subalgebra]:
    """The descending chain h = h_0 >= h_1 >= ..., stopping when stationary
    or zero.  Each next stage is the kernel of v -> ([v, x_b] mod h_i)_b."""
    if h.algebra is not g:
        raise LiePairError("subalgebra does not belong to the given algebra")
    chain = [h]
    current = h
    while current.dim > 0:
        nxt = _stabilizer_step(g, current)
        if nxt.dim == current.dim:
            break
        chain.append(nxt)
        current = nxt
    return chain


def _stabilizer_step(g: LieAlgebra, stage: Subalgebra) -> Subalgebra:
    """{ v in stage : [v, x] in stage for all x in g }, by exact kernels."""
    span_rows = row_echelon(stage.basis)
    # quotient test: [v, e_b] must lie in span(stage). Build the linear
    # conditions on the coefficients of v in stage's basis.
    conditions: List[List[Fraction]] = []
    dim = g.dim
    for b in range(dim):
        eb = g.basis_vector(b)
        images = [g.bracket(vec, eb) for vec in stage.basis]
        # residues mod stage span: reduce each image against span_rows; the
        # leftover coordinates give linear conditions sum_t coef_t * res_t = 0.
        reduced = [_reduce_mod(span_rows, img) for img in images]
        for coord in range(dim):
            row = [reduced[t][coord] for t in range(stage.dim)]
            if any(row):
                conditions.append(row)
    if not conditions:
        return stage
    kernel = nullspace(conditions, stage.dim)
    new_basis = []
    for combo in kernel:
        vec = [Fraction(0)] * dim
        for coeff, base_vec in zip(combo, stage.basis):
            if coeff:
                for t in range(dim):
                    vec[t] += coeff * base_vec[t]
        new_basis.append(vec)
    return Subalgebra(g, row_echelon(new_basis) if new_basis else [], validate=False)


def _reduce_mod(echelon_rows: List[List[Fraction]], vector: Sequence[Fraction]) -> List[Fraction]:
    vec = list(vector)
    for row in echelon_rows:
        p = next(i for i, x in enumerate(row) if x != 0)
        if vec[p] != 0:
            f = vec[p] / row[p]
            vec = [a - f * b for a, b in zip(vec, row)]
    return vec


def order_of(g: LieAlgebra, h: Subalgebra) -> int | str:
    """Number of steps for the filtration to die, or "ineffective"."""
    chain = filtration_of(g, h)
    if chain[-1].dim == 0:
        return len(chain) - 1
    return "ineffective"


def effective_check(g: LieAlgebra, h: Subalgebra) -> tuple[bool, List[List[Fraction]] | None]:
    """True when no nonzero ideal of g sits inside h.

    The stationary tail of the filtration is exactly the largest such
    ideal; its basis is returned as the witness on failure.
    """
    chain = filtration_of(g, h)
    tail = chain[-1]
    if tail.dim == 0:
        return True, None
    return False, [list(v) for v in tail.basis]


# --- relative adjoint action and the semidirect construction -----------------

def complement_basis(g: LieAlgebra, h: Subalgebra) -> List[int]:
    """Indices of ambient basis vectors completing h to all of g (pivot fill)."""
    rows = [list(v) for v in h.basis]
    chosen: List[int] = []
    for i in range(g.dim):
        candidate = rows + [list(g.basis_vector(i))]
        if rank(candidate) > rank(rows):
            rows = candidate
            chosen.append(i)
    return chosen


def relative_adjoint(g: LieAlgebra, h: Subalgebra) -> tuple["LieAlgebra", Representation, List[int]]:
    """The action of h on g/h induced by the bracket.

    Returns (h as an abstract algebra on its own basis, the representation,
    and the ambient indices of the chosen complement) so matrices are
    reproducible bit for bit.
    """
    comp = complement_basis(g, h)
    hdim, wdim = h.dim, len(comp)
    # abstract copy of h: structure constants in h's own basis
    habs = _abstract_subalgebra(g, h)
    span_rows = row_echelon(list(h.basis) + [list(g.basis_vector(i)) for i in comp]) \
        if h.dim else row_echelon([list(g.basis_vector(i)) for i in comp])
    matrices = []
    for bvec in h.basis:
        mat = [[Fraction(0)] * wdim for _ in range(wdim)]
        for col, amb in enumerate(comp):
            img = g.bracket(bvec, g.basis_vector(amb))
            coords = _coordinates(g, h, comp, img)
            for row in range(wdim):
                mat[row][col] = coords[row]
        matrices.append(mat)
    rep = Representation(habs, matrices) if hdim else Representation(habs, [])
    return habs, rep, comp


def _abstract_subalgebra(g: LieAlgebra, h: Subalgebra) -> LieAlgebra:
    brackets = {}
    for i in range(h.dim):
        for j in range(i + 1, h.dim):
            img = g.bracket(h.basis[i], h.basis[j])
            coeffs = _h_coordinates(g, h, img)
            if any(coeffs):
                brackets[(i, j)] = coeffs
    return LieAlgebra(h.dim, brackets)


def _solve_in_basis(basis_rows: List[List[Fraction]], vector: Sequence[Fraction]) -> List[Fraction]:
    """Coordinates of ``vector`` in the given basis (must be solvable)."""
    ncols = len(basis_rows)
    dim = len(vector)
    aug = [[basis_rows[c][r] for c in range(ncols)] + [Fraction(vector[r])] for r in range(dim)]
    ech = row_echelon(aug)
    coords = [Fraction(0)] * ncols
    for row in ech:
        p = next(i for i, x in enumerate(row) if x != 0)
        if p == ncols:
            raise LiePairError("vector does not lie in the span of the basis")
        coords[p] = row[ncols]
    return coords


def _h_coordinates(g, h, vector):
    return _solve_in_basis([list(v) for v in h.basis], vector)


def _coordinates(g, h, comp, vector):
    """Coordinates of vector mod h in the complement basis."""
    basis_rows = [list(v) for v in h.basis] + [list(g.basis_vector(i)) for i in comp]
    coords = _solve_in_basis(basis_rows, vector)
    return coords[h.dim:]


def semidirect_from_rep(h: LieAlgebra, rho: Representation) -> tuple[LieAlgebra, Subalgebra]:
    """Extend h by its module W: bracket ([a, b], rho(a) w' - rho(b) w).

    The result is h + W with h embedded as the leading coordinates; the
    Jacobi identity is re-validated, which fails exactly when rho is not a
    representation.
    """
    if rho.algebra is not h:
        raise LiePairError("representation does not act for the given algebra")
    hdim, wdim = h.dim, rho.space_dim
    dim = hdim + wdim
    brackets = {}
    for i in range(hdim):
        for j in range(i + 1, hdim):
            coeffs = [Fraction(0)] * dim
            hv = h.bracket(h.basis_vector(i), h.basis_vector(j))
            for t in range(hdim):
                coeffs[t] = hv[t]
            if any(coeffs):
                brackets[(i, j)] = coeffs
        for w in range(wdim):
            # [h_i, w_j] = rho(h_i) applied to the module vector
            coeffs = [Fraction(0)] * dim
            for t in range(wdim):
                coeffs[hdim + t] = rho.matrices[i][t][w]
            if any(coeffs):
                brackets[(i, hdim + w)] = coeffs
    g = LieAlgebra(dim, brackets)
    embedded = Subalgebra(g, [g.basis_vector(i) for i in range(hdim)])
    return g, embedded


# --- exchange documents -------------------------------------------------------

def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def pair_to_json(g: LieAlgebra, h: Subalgebra) -> dict:
    brackets = []
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            coeffs = [g.c[i][j][k] for k in range(g.dim)]
            if any(coeffs):
                brackets.append({"i": i, "j": j, "coeffs": [_frac_str(c) for c in coeffs]})
    return {
        "dim": g.dim,
        "brackets": brackets,
        "subalgebra": [[_frac_str(x) for x in vec] for vec in h.basis],
    }


def pair_from_json(doc: dict) -> tuple[LieAlgebra, Subalgebra]:
    try:
        dim = int(doc["dim"])
        raw_brackets = doc["brackets"]
        raw_sub = doc["subalgebra"]
    except (KeyError, TypeError) as exc:
        raise LiePairError(f"malformed Lie pair document: {exc}") from None
    brackets = {}
    for entry in raw_brackets:
        i, j = int(entry["i"]), int(entry["j"])
        brackets[(i, j)] = [Fraction(str(x)) for x in entry["coeffs"]]
    g = LieAlgebra(dim, brackets)
    h = Subalgebra(g, [[Fraction(str(x)) for x in vec] for vec in raw_sub])
    return g, h
