"""Irreducible GL_2(F_p) representations Sym^r tensor det^m, tame torus
characters, induction from the Iwahori, and irreducibility testing.

Action convention, fixed once: a matrix g = [[a,b],[c,d]] acts on the row of
linear forms (x y) by right multiplication, so x |-> a x + c y and
y |-> b x + d y.  Polynomials in x, y are listed on the basis
x^r, x^(r-1) y, ..., y^r.  With this convention the upper unipotent fixes the
monomial x^r, and diag(lam, mu) acts on it by lam^(r+m) mu^m.
"""

from __future__ import annotations

from math import comb

import numpy as np

from . import exactfield as xf
from .exactfield import Field, FieldElem
from .padicmat import Mat2, PadicRational, in_subgroup


def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    for g in range(2, p):
        seen = {1}
        x = 1
        for _ in range(p - 2):
            x = x * g % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    raise ValueError("no primitive root")  # unreachable for prime p


def dlog(p: int, g: int, a: int) -> int:
    """Discrete log base g in F_p^x by enumeration (p <= 13)."""
    x = 1
    for e in range(p - 1):
        if x == a % p:
            return e
        x = x * g % p
    raise ValueError(f"{a} is not a power of {g} mod {p}")


class Weight:
    """The (r+1)-dimensional representation Sym^r tensor det^m of GL_2(F_p),
    inflated to GL_2(Z_p) through reduction mod p (so K_1 acts trivially)."""

    def __init__(self, p: int, r: int, m: int, field: Field | None = None):
        if field is None:
            field = Field(p)
        if field.p != p:
            raise ValueError("field characteristic mismatch")
        if not 0 <= r <= p - 1:
            raise ValueError(f"r must be in 0..{p - 1}")
        if not 0 <= m < max(p - 1, 1):
            raise ValueError(f"m must be in 0..{max(p - 2, 0)}")
        self.p = p
        self.r = r
        self.m = m
        self.field = field
        self.dim = r + 1
        self._hecke_cache = {}

    def is_character(self) -> bool:
        return self.r == 0

    def __eq__(self, other):
        return (
            isinstance(other, Weight)
            and (self.p, self.r, self.m) == (other.p, other.r, other.m)
            and self.field.same_as(other.field)
        )

    def __hash__(self):
        return hash((self.p, self.r, self.m, self.field.k))

    def __repr__(self):
        return f"Sym^{self.r} det^{self.m}"

    # -- matrices -------------------------------------------------------------
    def action_matrix(self, gbar) -> np.ndarray:
        """Matrix of gbar = [[a,b],[c,d]] (integer residues) in code form;
        column i is the image of x^(r-i) y^i."""
        p, r = self.p, self.r
        (a, b), (c, d) = gbar
        det = (a * d - b * c) % p
        if det == 0:
            raise ValueError("not invertible mod p")
        detm = pow(det, self.m, p)
        cols = []
        for i in range(r + 1):
            # (a x + c y)^(r-i) * (b x + d y)^i, coefficients by y-degree
            first = [comb(r - i, j) * pow(a, r - i - j, p) * pow(c, j, p) % p
                     for j in range(r - i + 1)]
            second = [comb(i, j) * pow(b, i - j, p) * pow(d, j, p) % p
                      for j in range(i + 1)]
            out = [0] * (r + 1)
            for j1, c1 in enumerate(first):
                if c1:
                    for j2, c2 in enumerate(second):
                        out[j1 + j2] = (out[j1 + j2] + c1 * c2) % p
            cols.append([x * detm % p for x in out])
        # residues embed through the prime subfield, where codes coincide
        return np.array(cols, dtype=np.int64).T

    def reduce_k(self, k: Mat2):
        """Residue matrix of k in K; raises if k is not integral."""
        if not in_subgroup(k, "K"):
            raise ValueError("not integral")
        return tuple(
            tuple(e.residue() for e in row)
            for row in ((k.a, k.b), (k.c, k.d))
        )

    def act(self, k: Mat2, vec) -> list:
        """weight_action: apply k in K to a coefficient vector."""
        codes = self._vec_codes(vec)
        mat = self.action_matrix(self.reduce_k(k))
        out = xf.mat_vec_codes(self.field, mat, codes)
        return [self.field.from_code(int(c)) for c in out]

    def _vec_codes(self, vec) -> np.ndarray:
        if len(vec) != self.dim:
            raise ValueError("vector length mismatch")
        out = []
        for x in vec:
            out.append(x.code if isinstance(x, FieldElem) else self.field.el(x).code)
        return np.array(out, dtype=np.int64)

    def i1_fixed_line(self):
        """(v0, (e1, e2)): the line fixed by the pro-p Iwahori and the
        character exponents of the Iwahori torus on it."""
        p = self.p
        u1 = self.action_matrix(((1, 1), (0, 1)))
        lp = self.action_matrix(((1, 0), (0, 1)))  # lower-u(p) reduces to 1 mod p
        eye = np.eye(self.dim, dtype=np.int64)
        stacked = np.concatenate([
            (u1 - eye) % p if self.field.k == 1 else _code_sub(self.field, u1, eye),
            (lp - eye) % p if self.field.k == 1 else _code_sub(self.field, lp, eye),
        ])
        kern = xf.kernel_codes(self.field, stacked)
        if kern.shape[0] != 1:
            raise RuntimeError("weight model broken: fixed space not a line")
        v0 = kern[0]
        g = primitive_root(p)
        e1 = self._eigen_exponent(((g, 0), (0, 1)), v0)
        e2 = self._eigen_exponent(((1, 0), (0, g)), v0)
        return [self.field.from_code(int(c)) for c in v0], (e1, e2)

    def _eigen_exponent(self, gbar, v0) -> int:
        p = self.p
        if p == 2:
            return 0
        out = xf.mat_vec_codes(self.field, self.action_matrix(gbar), v0)
        nz = int(np.nonzero(v0)[0][0])
        lam = self.field.mul_codes(int(out[nz]), self.field.inv_code(int(v0[nz])))
        if not np.array_equal(out, _scale_codes(self.field, v0, lam)):
            raise RuntimeError("weight model broken: torus not scalar on fixed line")
        return dlog(p, primitive_root(p), lam)

    def k_module(self) -> "FiniteKModule":
        gens = {
            name: self.action_matrix(mat)
            for name, mat in standard_k_residue_gens(self.p).items()
        }
        return FiniteKModule(self.field, self.dim, gens,
                             provenance=f"weight {self!r} on GL2(F_{self.p}) generators")


def _code_sub(field, A, B):
    out = np.zeros_like(A)
    for idx in np.ndindex(A.shape):
        out[idx] = field.sub_codes(int(A[idx]), int(B[idx]))
    return out


def _scale_codes(field, v, lam):
    if field.k == 1:
        return (v * lam) % field.p
    return np.array([field.mul_codes(int(x), lam) for x in v], dtype=np.int64)


def weight_action(w: Weight, k: Mat2, v) -> list:
    return w.act(k, v)


def i1_fixed_line(w: Weight):
    return w.i1_fixed_line()


# ---------------------------------------------------------------------------
# tame torus characters
# ---------------------------------------------------------------------------

class TorusCharacter:
    """Tame character of the diagonal torus: exponents (i1, i2) mod p-1 on
    unit lifts, scalars (s1, s2) = values at diag(p,1), diag(1,p)."""

    def __init__(self, field: Field, i1: int, i2: int, s1, s2):
        self.field = field
        self.p = field.p
        n = max(self.p - 1, 1)
        self.i1 = i1 % n
        self.i2 = i2 % n
        self.s1 = field.el(s1)
        self.s2 = field.el(s2)
        if self.s1.is_zero() or self.s2.is_zero():
            raise ValueError("character scalars must be nonzero")

    @classmethod
    def trivial(cls, field: Field):
        return cls(field, 0, 0, 1, 1)

    def value_diag(self, alpha: PadicRational, delta: PadicRational) -> FieldElem:
        if alpha.is_zero() or delta.is_zero():
            raise ValueError("torus entries must be nonzero")
        va, vd = alpha.valuation, delta.valuation
        out = self.s1**va * self.s2**vd
        out = out * self.field.from_int(alpha.unit_residue()) ** self.i1
        out = out * self.field.from_int(delta.unit_residue()) ** self.i2
        return out

    def value_upper(self, b: Mat2) -> FieldElem:
        if not in_subgroup(b, "P"):
            raise ValueError("not upper triangular")
        return self.value_diag(b.a, b.d)

    def value_residue_pair(self, lam: int, mu: int) -> FieldElem:
        return (self.field.from_int(lam) ** self.i1) * (self.field.from_int(mu) ** self.i2)

    def conj(self) -> "TorusCharacter":
        return TorusCharacter(self.field, self.i2, self.i1, self.s2, self.s1)

    def is_symmetric(self) -> bool:
        return self == self.conj()

    def is_det_twist(self) -> bool:
        """Whether the character factors through the determinant."""
        return self.i1 == self.i2 and self.s1 == self.s2

    def twist_by_det(self, exponent: int, scalar) -> "TorusCharacter":
        sp = self.field.el(scalar)
        return TorusCharacter(self.field, self.i1 + exponent, self.i2 + exponent,
                              self.s1 * sp, self.s2 * sp)

    def __eq__(self, other):
        return (
            isinstance(other, TorusCharacter)
            and self.field.same_as(other.field)
            and (self.i1, self.i2) == (other.i1, other.i2)
            and self.s1 == other.s1
            and self.s2 == other.s2
        )

    def __hash__(self):
        return hash((self.i1, self.i2, self.s1.code, self.s2.code))

    def __repr__(self):
        return f"({self.i1},{self.i2};{self.s1},{self.s2})"


# ---------------------------------------------------------------------------
# finite K-modules
# ---------------------------------------------------------------------------

def standard_k_residue_gens(p: int) -> dict:
    """Generators of GL_2(F_p) as integer residue matrices."""
    g = primitive_root(p)
    return {
        "u1": ((1, 1), (0, 1)),
        "l1": ((1, 0), (1, 1)),
        "s": ((0, 1), (1, 0)),
        "dg1": ((g, 0), (0, 1)),
        "d1g": ((1, 0), (0, g)),
    }


class FiniteKModule:
    """Finite-dimensional K-module given by action matrices for the fixed
    generating set of GL_2(F_p); records where its generators came from."""

    def __init__(self, field: Field, dim: int, gens: dict, provenance: str = "",
                 residue_action=None):
        self.field = field
        self.dim = dim
        self.gens = {k: np.asarray(v, dtype=np.int64) for k, v in gens.items()}
        self.provenance = provenance
        self.residue_action = residue_action  # optional: arbitrary residue matrix -> action

    def act(self, name: str, vec: np.ndarray) -> np.ndarray:
        return xf.mat_vec_codes(self.field, self.gens[name], np.asarray(vec, dtype=np.int64))

    def check_relations(self) -> bool:
        """Spot-check the defining relations of the generator set."""
        f = self.field
        eye = np.eye(self.dim, dtype=np.int64)
        mm = lambda A, B: xf.mat_mul_codes(f, A, B)
        power = lambda A, n: eye if n == 0 else mm(power(A, n - 1), A)
        s, u1, l1 = self.gens["s"], self.gens["u1"], self.gens["l1"]
        ok = np.array_equal(mm(s, s), eye)
        ok = ok and np.array_equal(power(u1, self.field.p), eye)
        ok = ok and np.array_equal(power(l1, self.field.p), eye)
        ok = ok and np.array_equal(mm(mm(s, u1), s), l1)
        n = self.field.p - 1
        if n:
            ok = ok and np.array_equal(power(self.gens["dg1"], n), eye)
            ok = ok and np.array_equal(power(self.gens["d1g"], n), eye)
        return bool(ok)

    def span_closure(self, rows: np.ndarray) -> np.ndarray:
        """Smallest K-stable subspace containing the given row vectors,
        returned as an RREF basis (rows)."""
        basis = _rref_rows(self.field, np.asarray(rows, dtype=np.int64))
        while True:
            new = [basis]
            for A in self.gens.values():
                new.append(xf.mat_mul_codes(self.field, basis, A.T))
            bigger = _rref_rows(self.field, np.concatenate(new))
            if bigger.shape[0] == basis.shape[0]:
                return basis
            basis = bigger


def _rref_rows(field, rows):
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return rows.reshape(0, rows.shape[1] if rows.ndim == 2 else 0)
    R, piv = xf.rref(field, rows)
    return R[: len(piv)]


def weight_module(w: Weight) -> FiniteKModule:
    return w.k_module()


def induce_from_iwahori(chi: TorusCharacter) -> FiniteKModule:
    """Ind_I^K chi: chi-twisted functions on the p+1 cosets of the Iwahori,
    realized on the coset representatives lower-u(0..p-1) and s."""
    p = chi.p
    field = chi.field

    def act_residue(kbar):
        # (k.f)(rep_j) = chi(i) f(rep_j') where rep_j . k = i . rep_j'
        mat = np.zeros((p + 1, p + 1), dtype=np.int64)
        for j in range(p + 1):
            w = _mat_mul_residue(_coset_rep(j, p), kbar, p)
            c, d = w[1]
            if d % p:
                jp = c * pow(d, -1, p) % p
                i = _mat_mul_residue(w, _residue_inverse(_coset_rep(jp, p), p), p)
            else:
                jp = p
                i = _mat_mul_residue(w, ((0, 1), (1, 0)), p)
            val = chi.value_residue_pair(i[0][0], i[1][1])
            mat[j, jp] = val.code
        return mat

    gens = {name: act_residue(mat) for name, mat in standard_k_residue_gens(p).items()}
    mod = FiniteKModule(field, p + 1, gens,
                        provenance=f"Ind_I^K{chi!r} on coset representatives",
                        residue_action=act_residue)
    return mod


def _coset_rep(j: int, p: int):
    if j == p:
        return ((0, 1), (1, 0))
    return ((1, 0), (j, 1))


def _mat_mul_residue(A, B, p):
    return tuple(
        tuple(sum(A[i][k] * B[k][j] for k in range(2)) % p for j in range(2))
        for i in range(2)
    )


def _residue_inverse(A, p):
    (a, b), (c, d) = A
    det_inv = pow((a * d - b * c) % p, -1, p)
    return tuple(
        tuple(x * det_inv % p for x in row)
        for row in ((d, -b % p), (-c % p, a))
    )


def iwahori_w0_vector(mod: FiniteKModule, chi: TorusCharacter) -> np.ndarray:
    """Sum over lambda of u(lambda) s applied to the identity-coset function."""
    p = chi.p
    f0 = np.zeros(mod.dim, dtype=np.int64)
    f0[0] = 1
    out = np.zeros(mod.dim, dtype=np.int64)
    for lam in range(p):
        g = _mat_mul_residue(((1, lam), (0, 1)), ((0, 1), (1, 0)), p)
        vec = xf.mat_vec_codes(mod.field, mod.residue_action(g), f0)
        out = _add_codes_vec(mod.field, out, vec)
    return out


def _add_codes_vec(field, a, b):
    if field.k == 1:
        return (a + b) % field.p
    return np.array([field.add_codes(int(x), int(y)) for x, y in zip(a, b)], dtype=np.int64)


# ---------------------------------------------------------------------------
# irreducibility
# ---------------------------------------------------------------------------

class IrreducibilityVerdict:
    def __init__(self, status, witness=None, detail=""):
        self.status = status  # "irreducible" | "reducible" | "inconclusive"
        self.witness = witness  # basis rows of a proper submodule, if reducible
        self.detail = detail

    def __repr__(self):
        return f"<{self.status}: {self.detail}>"


def is_irreducible(mod: FiniteKModule) -> IrreducibilityVerdict:
    """Decide irreducibility by the fixed-vector criterion.

    Any nonzero submodule meets the U-fixed space in a joint eigenline of the
    residue torus (eigenvalues are (p-1)-th roots of unity, hence live in the
    prime field).  All such lines are enumerated; the module is reducible
    exactly when one of them generates a proper submodule.  When that test
    passes, a one-dimensional commutant upgrades the verdict to (absolutely)
    irreducible; otherwise the verdict is inconclusive.
    """
    field = mod.field
    p = field.p
    eye = np.eye(mod.dim, dtype=np.int64)
    ufix = xf.kernel_codes(field, _code_sub_np(field, mod.gens["u1"], eye))
    if ufix.shape[0] == 0:
        return IrreducibilityVerdict("inconclusive", detail="no U-fixed vectors")

    # restrict the torus generators to the U-fixed space
    d1 = _restrict(field, mod.gens["dg1"], ufix)
    d2 = _restrict(field, mod.gens["d1g"], ufix)
    g = field.from_int(primitive_root(p)) if p > 2 else field.one()
    wdim = ufix.shape[0]
    weye = np.eye(wdim, dtype=np.int64)

    lines = []
    exps = range(p - 1) if p > 2 else range(1)
    for e1 in exps:
        for e2 in exps:
            lam1 = (g**e1).code
            lam2 = (g**e2).code
            stack = np.concatenate([
                _code_sub_np(field, d1, _scale_mat(field, weye, lam1)),
                _code_sub_np(field, d2, _scale_mat(field, weye, lam2)),
            ])
            E = xf.kernel_codes(field, stack)
            if E.shape[0] == 0:
                continue
            count = (field.size ** E.shape[0] - 1) // (field.size - 1)
            if count > 2000:
                return IrreducibilityVerdict(
                    "inconclusive", detail=f"eigenspace too large ({count} lines)")
            for vec in _enumerate_lines(field, E):
                lines.append((e1, e2, xf.mat_vec_codes(field, ufix.T, vec)))

    for e1, e2, line in lines:
        span = mod.span_closure(line[None, :])
        if span.shape[0] < mod.dim:
            return IrreducibilityVerdict(
                "reducible", witness=span,
                detail=f"eigenline ({e1},{e2}) generates dim {span.shape[0]}")

    cdim = commutant_dimension(mod)
    if cdim == 1:
        return IrreducibilityVerdict("irreducible",
                                     detail=f"{len(lines)} eigenlines, scalar commutant")
    return IrreducibilityVerdict(
        "inconclusive",
        detail=f"irreducible over {field!r} but commutant has dim {cdim}")


def _code_sub_np(field, A, B):
    if field.k == 1:
        return (A - B) % field.p
    return _code_sub(field, A, B)


def _scale_mat(field, A, lam):
    if field.k == 1:
        return (A * lam) % field.p
    out = np.zeros_like(A)
    for idx in np.ndindex(A.shape):
        out[idx] = field.mul_codes(int(A[idx]), lam)
    return out


def _restrict(field, A, basis_rows):
    """Matrix of A on the subspace spanned by basis_rows (must be stable)."""
    img = xf.mat_mul_codes(field, basis_rows, A.T)  # rows = images
    cols = []
    for row in img:
        x, _, cert = xf.solve_codes(field, basis_rows.T, row)
        if cert is not None:
            raise ValueError("subspace not stable")
        cols.append(x)
    return np.array(cols, dtype=np.int64).T


def _enumerate_lines(field, basis_rows):
    """All lines of the row space, one normalized vector per line."""
    e = basis_rows.shape[0]
    q = field.size
    seen = set()
    out = []
    for code in range(1, q**e):
        coeffs = []
        c = code
        for _ in range(e):
            coeffs.append(c % q)
            c //= q
        vec = np.zeros(basis_rows.shape[1], dtype=np.int64)
        for ci, row in zip(coeffs, basis_rows):
            if ci:
                vec = _add_codes_vec(field, vec, _scale_codes(field, row, ci))
        nz = np.nonzero(vec)[0]
        if nz.size == 0:
            continue
        lead_inv = field.inv_code(int(vec[nz[0]]))
        vec = _scale_codes(field, vec, lead_inv)
        key = tuple(int(x) for x in vec)
        if key not in seen:
            seen.add(key)
            out.append(vec)
    return out


def restrict_module(mod: FiniteKModule, basis_rows: np.ndarray) -> FiniteKModule:
    """The module structure on a stable subspace, in the given basis."""
    gens = {name: _restrict(mod.field, A, basis_rows) for name, A in mod.gens.items()}
    return FiniteKModule(mod.field, basis_rows.shape[0], gens,
                         provenance=f"submodule of [{mod.provenance}]")


def commutant_dimension(mod: FiniteKModule) -> int:
    """Dimension of the algebra of matrices commuting with all generators."""
    field = mod.field
    n = mod.dim
    rows = []
    for A in mod.gens.values():
        # coefficient of M[k,l] in (A M - M A)[i,j] is A[i,k] d_{lj} - d_{ik} A[l,j]
        for i in range(n):
            for j in range(n):
                row = np.zeros(n * n, dtype=np.int64)
                for k in range(n):
                    row[k * n + j] = field.add_codes(int(row[k * n + j]), int(A[i, k]))
                for l in range(n):
                    row[i * n + l] = field.sub_codes(int(row[i * n + l]), int(A[l, j]))
                rows.append(row)
    kern = xf.kernel_codes(field, np.array(rows, dtype=np.int64))
    return kern.shape[0]


def intertwiner_dimension(field, gens1: dict, gens2: dict, dim1: int, dim2: int) -> int:
    """dim Hom_K(V1, V2) for modules given by matching generator dicts."""
    rows = []
    for name in gens1:
        A1 = np.asarray(gens1[name], dtype=np.int64)
        A2 = np.asarray(gens2[name], dtype=np.int64)
        # M A1 = A2 M with M of shape (dim2, dim1); unknowns M[i,j]
        for i in range(dim2):
            for j in range(dim1):
                row = np.zeros(dim2 * dim1, dtype=np.int64)
                for k in range(dim1):
                    row[i * dim1 + k] = field.add_codes(int(row[i * dim1 + k]), int(A1[k, j]))
                for l in range(dim2):
                    row[l * dim1 + j] = field.sub_codes(int(row[l * dim1 + j]), int(A2[i, l]))
                rows.append(row)
    kern = xf.kernel_codes(field, np.array(rows, dtype=np.int64))
    return kern.shape[0]


def all_stable_subspaces(mod: FiniteKModule):
    """Exhaustive submodule lattice by enumerating every RREF basis.

    Only sensible at desk scale (used for p in {2,3}, dim <= p+1)."""
    field = mod.field
    n = mod.dim
    q = field.size
    found = [np.zeros((0, n), dtype=np.int64)]
    from itertools import combinations, product

    for d in range(1, n):
        for pivots in combinations(range(n), d):
            free_positions = []
            for ri, pc in enumerate(pivots):
                for col in range(pc + 1, n):
                    if col not in pivots:
                        free_positions.append((ri, col))
            for assignment in product(range(q), repeat=len(free_positions)):
                B = np.zeros((d, n), dtype=np.int64)
                for ri, pc in enumerate(pivots):
                    B[ri, pc] = 1
                for (ri, col), val in zip(free_positions, assignment):
                    B[ri, col] = val
                if _is_stable(mod, B):
                    found.append(B)
    found.append(np.eye(n, dtype=np.int64))
    return found


def _is_stable(mod, basis_rows):
    field = mod.field
    rk = basis_rows.shape[0]
    for A in mod.gens.values():
        img = xf.mat_mul_codes(field, basis_rows, A.T)
        if xf.rank_codes(field, np.concatenate([basis_rows, img])) != rk:
            return False
    return True
