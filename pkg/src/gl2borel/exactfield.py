"""Exact arithmetic in small finite fields and dense linear algebra over them.

Everything downstream (coset decompositions, Hecke operators, principal-series
tables, experiment drivers) reduces its questions to linear solves over
F_{p^k}, so this module is deliberately small, exact and deterministic:
integer codes for field elements, first-nonzero pivoting, no floating point.

Elements of F_{p^k} = F_p[x]/(modulus) are coded as integers
c0 + c1*p + ... + c_{k-1}*p^{k-1}.  Dense solves run on numpy int64 arrays:
direct mod-p arithmetic for prime fields, lookup tables for small extensions,
and a plain Python fallback for large extension fields.
"""

from __future__ import annotations

import numpy as np

SUPPORTED_PRIMES = (2, 3, 5, 7, 11, 13)

# lookup tables are built lazily and only for fields up to this size
_TABLE_LIMIT = 1024


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


# ---------------------------------------------------------------------------
# polynomial helpers over F_p (little-endian coefficient tuples)
# ---------------------------------------------------------------------------

def _poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_mod(a, modulus, p):
    # modulus is monic
    a = list(a)
    dm = len(modulus) - 1
    while len(a) > dm:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - dm
            for i, mi in enumerate(modulus):
                a[shift + i] = (a[shift + i] - lead * mi) % p
        a.pop()
    return _poly_trim(a)


def _poly_is_irreducible(modulus, p):
    """Trial division by every monic polynomial of degree 1..deg/2."""
    deg = len(modulus) - 1
    if deg < 1 or modulus[-1] != 1:
        return False
    if deg == 1:
        return True
    for d in range(1, deg // 2 + 1):
        for code in range(p**d):
            divisor = [0] * (d + 1)
            c = code
            for i in range(d):
                divisor[i] = c % p
                c //= p
            divisor[d] = 1
            if not _poly_mod(modulus, tuple(divisor), p):
                return False
    return True


def _default_modulus(p, k):
    """Lexicographically first monic irreducible of degree k over F_p."""
    if k == 1:
        return (0, 1)
    for code in range(p**k):
        cand = [0] * (k + 1)
        c = code
        for i in range(k):
            cand[i] = c % p
            c //= p
        cand[k] = 1
        if _poly_is_irreducible(tuple(cand), p):
            return tuple(cand)
    raise RuntimeError("no irreducible polynomial found")  # unreachable


# ---------------------------------------------------------------------------
# fields and elements
# ---------------------------------------------------------------------------

class Field:
    """The finite field F_{p^k}, with p prime (2..13) and 1 <= k <= 4."""

    def __init__(self, p: int, k: int = 1, modulus=None):
        if p not in SUPPORTED_PRIMES:
            raise ValueError(f"p must be a prime in {SUPPORTED_PRIMES}, got {p}")
        if not 1 <= k <= 4:
            raise ValueError(f"extension degree k must be in 1..4, got {k}")
        if modulus is None:
            modulus = _default_modulus(p, k)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree k")
        if not _poly_is_irreducible(modulus, p):
            raise ValueError("modulus is not irreducible over F_p")
        self.p = p
        self.k = k
        self.modulus = modulus
        self.size = p**k
        self._add_table = None
        self._mul_table = None
        self._inv_table = None

    # -- identity / compatibility ------------------------------------------
    def same_as(self, other) -> bool:
        return (
            isinstance(other, Field)
            and other.p == self.p
            and other.k == self.k
            and other.modulus == self.modulus
        )

    def __repr__(self):
        if self.k == 1:
            return f"F({self.p})"
        return f"F({self.p}^{self.k})"

    # -- element construction ----------------------------------------------
    def el(self, value) -> "FieldElem":
        """Make an element from an int residue, a code is not guessed: ints
        embed through the prime subfield; pass a coeff list for extensions."""
        if isinstance(value, FieldElem):
            if not self.same_as(value.field):
                raise ValueError("field mismatch")
            return value
        if isinstance(value, (list, tuple)):
            if len(value) > self.k:
                raise ValueError("too many coefficients")
            code = 0
            for i, c in enumerate(value):
                code += (int(c) % self.p) * self.p**i
            return FieldElem(self, code)
        return FieldElem(self, int(value) % self.p)

    def from_code(self, code: int) -> "FieldElem":
        if not 0 <= code < self.size:
            raise ValueError("code out of range")
        return FieldElem(self, code)

    def from_int(self, n: int) -> "FieldElem":
        """Embed an integer residue through the prime subfield."""
        return FieldElem(self, int(n) % self.p)

    def zero(self) -> "FieldElem":
        return FieldElem(self, 0)

    def one(self) -> "FieldElem":
        return FieldElem(self, 1)

    def gen(self) -> "FieldElem":
        """The class of x (for k = 1 this is just 1)."""
        return FieldElem(self, self.p if self.k > 1 else 1)

    def elements(self):
        for code in range(self.size):
            yield FieldElem(self, code)

    # -- code-level arithmetic ---------------------------------------------
    def _code_to_poly(self, code):
        out = []
        while code:
            out.append(code % self.p)
            code //= self.p
        return tuple(out)

    def _poly_to_code(self, poly):
        code = 0
        for i, c in enumerate(poly):
            code += (c % self.p) * self.p**i
        return code

    def add_codes(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        out = 0
        mult = 1
        for _ in range(self.k):
            out += ((a % self.p + b % self.p) % self.p) * mult
            a //= self.p
            b //= self.p
            mult *= self.p
        return out

    def neg_code(self, a):
        if self.k == 1:
            return (-a) % self.p
        out = 0
        mult = 1
        for _ in range(self.k):
            out += ((-a) % self.p) * mult
            a //= self.p
            mult *= self.p
        return out

    def sub_codes(self, a, b):
        return self.add_codes(a, self.neg_code(b))

    def mul_codes(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        prod = _poly_mul(self._code_to_poly(a), self._code_to_poly(b), self.p)
        return self._poly_to_code(_poly_mod(prod, self.modulus, self.p))

    def pow_code(self, a, n):
        out = 1
        base = a
        while n:
            if n & 1:
                out = self.mul_codes(out, base)
            base = self.mul_codes(base, base)
            n >>= 1
        return out

    def inv_code(self, a):
        if a == 0:
            raise ZeroDivisionError("division by zero")
        if self.k == 1:
            return pow(a, self.p - 2, self.p)
        return self.pow_code(a, self.size - 2)

    # -- lookup tables for vectorized extension-field solves ----------------
    def _ensure_tables(self):
        if self._mul_table is not None or self.k == 1:
            return
        if self.size > _TABLE_LIMIT:
            return  # generic slow path stays in charge
        n = self.size
        add = np.zeros((n, n), dtype=np.int64)
        mul = np.zeros((n, n), dtype=np.int64)
        inv = np.zeros(n, dtype=np.int64)
        for a in range(n):
            for b in range(n):
                add[a, b] = self.add_codes(a, b)
                mul[a, b] = self.mul_codes(a, b)
            if a:
                inv[a] = self.inv_code(a)
        self._add_table = add
        self._mul_table = mul
        self._inv_table = inv


class FieldElem:
    """An element of a Field, identified by its integer code."""

    __slots__ = ("field", "code")

    def __init__(self, field: Field, code: int):
        self.field = field
        self.code = code

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if not self.field.same_as(other.field):
                raise ValueError("field mismatch")
            return other.code
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, self.field.add_codes(self.code, c))

    __radd__ = __add__

    def __sub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, self.field.sub_codes(self.code, c))

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, self.field.sub_codes(c, self.code))

    def __mul__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, self.field.mul_codes(self.code, c))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElem(self.field, self.field.neg_code(self.code))

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        return FieldElem(self.field, self.field.pow_code(self.code, n))

    def inv(self) -> "FieldElem":
        return FieldElem(self.field, self.field.inv_code(self.code))

    def __truediv__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, self.field.mul_codes(self.code, self.field.inv_code(c)))

    def is_zero(self) -> bool:
        return self.code == 0

    @property
    def coeffs(self):
        out = []
        c = self.code
        for _ in range(self.field.k):
            out.append(c % self.field.p)
            c //= self.field.p
        return tuple(out)

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.field.same_as(other.field) and self.code == other.code
        if isinstance(other, int):
            return self.code == self.field.el(other).code
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.k, self.code))

    def __repr__(self):
        if self.field.k == 1:
            return str(self.code)
        return "+".join(
            f"{c}x^{i}" if i else str(c)
            for i, c in enumerate(self.coeffs)
            if c
        ) or "0"


def field_arith(a: FieldElem, b, op: str) -> FieldElem:
    """Dispatcher for the three primitive operations: add, mul, inv."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        if a.is_zero():
            raise ZeroDivisionError("division by zero")
        return a.inv()
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# dense linear algebra on integer-code matrices
# ---------------------------------------------------------------------------

def _vectorized(field: Field) -> bool:
    if field.k == 1:
        return True
    field._ensure_tables()
    return field._mul_table is not None


def _np_scale_row(field, row, factor):
    if field.k == 1:
        return (row * factor) % field.p
    if _vectorized(field):
        return field._mul_table[row, factor]
    out = np.array(row, dtype=np.int64)
    for idx in np.ndindex(out.shape):
        out[idx] = field.mul_codes(int(out[idx]), factor)
    return out


def _np_neg(field, a):
    if field.k == 1:
        return (-a) % field.p
    if _vectorized(field):
        neg_one = field.neg_code(1)
        return field._mul_table[a, neg_one]
    out = np.array(a, dtype=np.int64)
    for idx in np.ndindex(out.shape):
        out[idx] = field.neg_code(int(out[idx]))
    return out


def rref(field: Field, mat: np.ndarray, pivot_limit: int | None = None):
    """Reduced row echelon form over the field.

    mat is an int64 array of codes; returns (R, pivot_columns).
    Deterministic: the pivot is always the first row with a nonzero entry.
    With pivot_limit, only the first pivot_limit columns are eliminated
    (the rest are carried along, e.g. an augmented identity block).
    """
    if not _vectorized(field):
        return _rref_generic(field, mat, pivot_limit)
    A = np.array(mat, dtype=np.int64)
    m, n = A.shape
    stop = n if pivot_limit is None else min(pivot_limit, n)
    pivots = []
    r = 0
    for c in range(stop):
        if r == m:
            break
        col = A[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        inv = field.inv_code(int(A[r, c]))
        A[r] = _np_scale_row(field, A[r], inv)
        factors = A[:, c].copy()
        factors[r] = 0
        if np.any(factors):
            update = _np_outer(field, factors, A[r])
            A = _np_sub_mat(field, A, update)
        pivots.append(c)
        r += 1
    return A, pivots


def _np_outer(field, col, row):
    if field.k == 1:
        return (col[:, None] * row[None, :]) % field.p
    if _vectorized(field):
        return field._mul_table[col[:, None], row[None, :]]
    out = np.zeros((len(col), len(row)), dtype=np.int64)
    for i, c in enumerate(col):
        for j, r in enumerate(row):
            out[i, j] = field.mul_codes(int(c), int(r))
    return out


def _np_sub_mat(field, A, B):
    if field.k == 1:
        return (A - B) % field.p
    if _vectorized(field):
        return field._add_table[A, _np_neg(field, B)]
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = np.zeros_like(A)
    for idx in np.ndindex(A.shape):
        out[idx] = field.sub_codes(int(A[idx]), int(B[idx]))
    return out


def _rref_generic(field, mat, pivot_limit=None):
    """Plain-Python fallback for extension fields without lookup tables."""
    A = [[int(x) for x in row] for row in np.asarray(mat)]
    m = len(A)
    n = len(A[0]) if m else 0
    stop = n if pivot_limit is None else min(pivot_limit, n)
    pivots = []
    r = 0
    for c in range(stop):
        if r == m:
            break
        pivot = next((i for i in range(r, m) if A[i][c]), None)
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        inv = field.inv_code(A[r][c])
        A[r] = [field.mul_codes(x, inv) for x in A[r]]
        for i in range(m):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [field.sub_codes(x, field.mul_codes(f, y)) for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return np.array(A, dtype=np.int64).reshape(m, n), pivots


def kernel_codes(field: Field, mat: np.ndarray) -> np.ndarray:
    """Basis of the right kernel, rows = basis vectors, leading entry 1."""
    A = np.asarray(mat, dtype=np.int64)
    if A.size == 0:
        n = A.shape[1] if A.ndim == 2 else 0
        return np.eye(n, dtype=np.int64)
    R, pivots = rref(field, A)
    n = A.shape[1]
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for bi, fc in enumerate(free):
        basis[bi, fc] = 1
        for ri, pc in enumerate(pivots):
            basis[bi, pc] = field.neg_code(int(R[ri, fc]))
    # normalize leading entries to 1 for reproducible output
    for bi in range(basis.shape[0]):
        nz = np.nonzero(basis[bi])[0]
        lead = int(basis[bi, nz[0]])
        if lead != 1:
            basis[bi] = _np_scale_row(field, basis[bi], field.inv_code(lead))
    return basis


def rank_codes(field: Field, mat: np.ndarray) -> int:
    A = np.asarray(mat, dtype=np.int64)
    if A.size == 0:
        return 0
    _, pivots = rref(field, A)
    return len(pivots)


def solve_codes(field: Field, A: np.ndarray, b: np.ndarray):
    """One solution of A x = b plus kernel, or an inconsistency certificate.

    Returns (solution | None, kernel_rows, certificate | None); the
    certificate is a left null vector v with v A = 0 and v . b != 0.
    """
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError("dimension mismatch between matrix and rhs")
    aug = np.concatenate([A, b[:, None], np.eye(m, dtype=np.int64)], axis=1)
    R, pivots = rref(field, aug)
    # pivots are reported in the combined matrix; split them
    col_b = n
    if col_b in pivots:
        # inconsistent: the row whose pivot is the rhs column certifies it
        ri = pivots.index(col_b)
        cert = R[ri, col_b + 1:]
        kern = kernel_codes(field, A)
        return None, kern, cert
    x = np.zeros(n, dtype=np.int64)
    for ri, pc in enumerate(pivots):
        if pc < n:
            x[pc] = R[ri, col_b]
    kern = kernel_codes(field, A)
    return x, kern, None


def invert_matrix_codes(field: Field, A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("dimension mismatch")
    aug = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
    R, pivots = rref(field, aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return R[:, n:]


def mat_vec_codes(field: Field, A: np.ndarray, x: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    if field.k == 1:
        return (A @ x) % field.p
    out = np.zeros(A.shape[0], dtype=np.int64)
    for i in range(A.shape[0]):
        acc = 0
        for j in range(A.shape[1]):
            acc = field.add_codes(acc, field.mul_codes(int(A[i, j]), int(x[j])))
        out[i] = acc
    return out


def mat_mul_codes(field: Field, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if field.k == 1:
        return (A @ B) % field.p
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for j in range(B.shape[1]):
        out[:, j] = mat_vec_codes(field, A, B[:, j])
    return out


class CachedSolver:
    """Factor A once and answer A x = b queries with exact certificates.

    The row transform L with L A = R (R echelon, pivot columns unit) is kept,
    so each query costs one matrix-vector product."""

    def __init__(self, field: Field, A: np.ndarray):
        self.field = field
        A = np.asarray(A, dtype=np.int64)
        self.m, self.n = A.shape
        aug = np.concatenate([A, np.eye(self.m, dtype=np.int64)], axis=1)
        R, piv = rref(field, aug, pivot_limit=self.n)
        self.pivots = piv
        self.rank = len(piv)
        self.R = R[:, : self.n]
        self.L = R[:, self.n :]

    def solve(self, b: np.ndarray):
        """(solution, certificate): exactly one of the two is not None."""
        b = np.asarray(b, dtype=np.int64)
        c = mat_vec_codes(self.field, self.L, b)
        for i in range(self.rank, self.m):
            if c[i]:
                return None, self.L[i]
        # pivot columns are unit vectors (full elimination), so reading the
        # transformed rhs off the pivot rows is an exact solution
        x = np.zeros(self.n, dtype=np.int64)
        for ri, pc in enumerate(self.pivots):
            x[pc] = c[ri]
        return x, None


class IncrementalSpan:
    """A growing subspace kept in reduced echelon form, one row at a time."""

    def __init__(self, field: Field, dim: int):
        self.field = field
        self.width = dim
        self.rows = []
        self.leads = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def _reduce(self, vec: np.ndarray) -> np.ndarray:
        vec = np.array(vec, dtype=np.int64)
        for lead, row in zip(self.leads, self.rows):
            c = int(vec[lead])
            if c:
                upd = _np_scale_row(self.field, row, c)
                vec = _np_sub_mat(self.field, vec, upd)
        return vec

    def contains(self, vec) -> bool:
        return not np.any(self._reduce(vec))

    def add(self, vec) -> bool:
        """Insert the vector; True when it enlarged the span."""
        v = self._reduce(vec)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        lead = int(nz[0])
        v = _np_scale_row(self.field, v, self.field.inv_code(int(v[lead])))
        for i, row in enumerate(self.rows):
            c = int(row[lead])
            if c:
                self.rows[i] = _np_sub_mat(self.field, row, _np_scale_row(self.field, v, c))
        self.rows.append(v)
        self.leads.append(lead)
        return True


def matrix_relation_kernel(field: Field, pairs, dim_in: int, dim_out: int):
    """Basis of {M (dim_out x dim_in) : M A = B M for every (A, B) pair}."""
    rows = []
    for A, B in pairs:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        for i in range(dim_out):
            for j in range(dim_in):
                row = np.zeros(dim_out * dim_in, dtype=np.int64)
                for k in range(dim_in):
                    row[i * dim_in + k] = field.add_codes(int(row[i * dim_in + k]), int(A[k, j]))
                for l in range(dim_out):
                    row[l * dim_in + j] = field.sub_codes(int(row[l * dim_in + j]), int(B[i, l]))
                rows.append(row)
    kern = kernel_codes(field, np.array(rows, dtype=np.int64))
    return [k.reshape(dim_out, dim_in) for k in kern]


# ---------------------------------------------------------------------------
# FieldElem-level wrapper: the public solve
# ---------------------------------------------------------------------------

class LinearSolveResult:
    """Outcome of solve_linear: a solution with kernel basis, or a no-solution
    certificate (left null vector v with v.matrix = 0 and v.rhs != 0)."""

    def __init__(self, field, solution, kernel, certificate):
        self.field = field
        self.solution = solution
        self.kernel = kernel
        self.certificate = certificate

    @property
    def status(self):
        return "solution" if self.solution is not None else "no-solution"

    def __repr__(self):
        if self.solution is None:
            return "<no-solution with certificate>"
        return f"<solution, kernel dim {len(self.kernel)}>"


def _rows_to_codes(field, rows, width=None):
    mat = []
    for row in rows:
        r = []
        for x in row:
            if isinstance(x, FieldElem):
                if not field.same_as(x.field):
                    raise ValueError("field mismatch")
                r.append(x.code)
            else:
                r.append(field.el(x).code)
        mat.append(r)
    if mat and any(len(r) != len(mat[0]) for r in mat):
        raise ValueError("dimension mismatch: ragged matrix")
    if width is not None and mat and len(mat[0]) != width:
        raise ValueError("dimension mismatch")
    return np.array(mat, dtype=np.int64)


def _infer_field(rows, rhs, field):
    if field is not None:
        return field
    for row in list(rows) + [list(rhs)]:
        for x in row:
            if isinstance(x, FieldElem):
                return x.field
    raise ValueError("cannot infer field: pass field=...")


def solve_linear(matrix, rhs, field: Field | None = None) -> LinearSolveResult:
    """Solve matrix . x = rhs over a finite field.

    Returns a LinearSolveResult carrying one solution and a kernel basis, or
    an inconsistency certificate.  Raises ValueError on dimension mismatch
    and on mixed fields.
    """
    matrix = [list(r) for r in matrix]
    rhs = list(rhs)
    fld = _infer_field(matrix, rhs, field)
    if len(matrix) != len(rhs):
        raise ValueError("dimension mismatch: rows vs rhs")
    if not matrix:
        raise ValueError("empty system")
    A = _rows_to_codes(fld, matrix)
    b = _rows_to_codes(fld, [rhs], width=None)[0]
    x, kern, cert = solve_codes(fld, A, b)
    wrap = lambda v: [fld.from_code(int(c)) for c in v]
    return LinearSolveResult(
        fld,
        wrap(x) if x is not None else None,
        [wrap(k) for k in kern],
        wrap(cert) if cert is not None else None,
    )
