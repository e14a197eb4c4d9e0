"""Compact induction from F^x K in a weight, its Hecke operator, and the
quotients by polynomials in that operator.

Elements are finite formal sums [g, v] over tree vertices (right cosets
g.(F^x K)), with v a coefficient vector of the weight.  The group acts on
labels by left multiplication; the Hecke operator is pinned by its value on
the canonical generator phi = [1, v0] and extended linearly and
G-equivariantly, which keeps every computation inside finite balls.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import exactfield as xf
from .exactfield import Field, FieldElem
from .fqweights import Weight
from .padicmat import (
    Mat2,
    TreeVertex,
    diag,
    fxk_factor,
    lower_u,
    pi_mat,
    s_mat,
    t_mat,
    upper_u,
    vertex_normalize,
)

DEFAULT_R_MAX = 4


class TruncationError(ValueError):
    pass


class SpanningSetError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

class CindElement:
    """Finite formal sum over tree vertices with weight-vector coefficients."""

    __slots__ = ("weight", "support")

    def __init__(self, weight: Weight, support=None):
        self.weight = weight
        clean = {}
        for v, coeffs in (support or {}).items():
            tup = tuple(weight.field.el(c) for c in coeffs)
            if len(tup) != weight.dim:
                raise ValueError("coefficient length mismatch")
            if any(not c.is_zero() for c in tup):
                clean[v] = tup
        self.support = clean

    def is_zero(self) -> bool:
        return not self.support

    def radius(self) -> int:
        if not self.support:
            return -1
        return max(v.distance() for v in self.support)

    def __add__(self, other):
        if not isinstance(other, CindElement) or other.weight != self.weight:
            return NotImplemented
        out = dict(self.support)
        f = self.weight.field
        for v, coeffs in other.support.items():
            if v in out:
                out[v] = tuple(a + b for a, b in zip(out[v], coeffs))
            else:
                out[v] = coeffs
        return CindElement(self.weight, out)

    def __neg__(self):
        return CindElement(
            self.weight, {v: tuple(-c for c in coeffs) for v, coeffs in self.support.items()}
        )

    def __sub__(self, other):
        if not isinstance(other, CindElement):
            return NotImplemented
        return self + (-other)

    def scale(self, x) -> "CindElement":
        x = self.weight.field.el(x)
        return CindElement(
            self.weight, {v: tuple(x * c for c in coeffs) for v, coeffs in self.support.items()}
        )

    def __eq__(self, other):
        if not isinstance(other, CindElement):
            return NotImplemented
        return self.weight == other.weight and self.support == other.support

    def __repr__(self):
        if self.is_zero():
            return "0"
        bits = [f"[{v}]*{list(coeffs)}" for v, coeffs in sorted(
            self.support.items(), key=lambda kv: kv[0].sort_key())]
        return " + ".join(bits)

    def serialize(self):
        return [
            {"vertex": v.serialize(), "coeffs": [c.code for c in coeffs]}
            for v, coeffs in sorted(self.support.items(), key=lambda kv: kv[0].sort_key())
        ]


def phi_element(weight: Weight) -> CindElement:
    """The canonical generator: supported on the base coset, value spanning
    the pro-p Iwahori fixed line."""
    v0, _ = weight.i1_fixed_line()
    base = TreeVertex(weight.p, 0, 0)
    return CindElement(weight, {base: v0})


def act(g: Mat2, f: CindElement) -> CindElement:
    """Left translation on labels: [x, v] |-> [g x, v], renormalized."""
    w = f.weight
    out = {}
    fld = w.field
    for vert, coeffs in f.support.items():
        nv, kz = vertex_normalize(g * vert.rep())
        _, k = fxk_factor(kz)  # central p-powers act trivially
        newc = w.act(k, list(coeffs))
        if nv in out:
            out[nv] = tuple(a + b for a, b in zip(out[nv], newc))
        else:
            out[nv] = tuple(newc)
    return CindElement(w, out)


# ---------------------------------------------------------------------------
# the Hecke operator
# ---------------------------------------------------------------------------

def _spanning_set(weight: Weight, variant: str):
    """K-elements k_j with sigma(k_j) v0 a basis: u(j) s for r+1 consecutive j."""
    shift = 0 if variant == "default" else 1
    return [upper_u(weight.p, j + shift) * s_mat(weight.p) for j in range(weight.r + 1)]


def _hecke_data(weight: Weight, variant: str = "default"):
    key = ("hecke", variant)
    if key in weight._hecke_cache:
        return weight._hecke_cache[key]
    v0, _ = weight.i1_fixed_line()
    ks = _spanning_set(weight, variant)
    cols = []
    for k in ks:
        cols.append([c.code for c in weight.act(k, v0)])
    S = np.array(cols, dtype=np.int64).T
    try:
        S_inv = xf.invert_matrix_codes(weight.field, S)
    except ValueError as exc:
        raise SpanningSetError("spanning set insufficient") from exc

    p = weight.p
    phi = phi_element(weight)
    tphi = CindElement(weight)
    if weight.is_character():
        # the translate of phi by Pi enters with the intrinsic coefficient
        # psi(-1) = (-1)^m; this is forced by K-semi-invariance of T(phi)
        # (act(s, T phi) = sigma(s) T phi), hence by equivariant extension
        sign = weight.field.from_int((-1) ** weight.m)
        tphi = tphi + act(pi_mat(p), phi).scale(sign)
    for lam in range(p):
        tphi = tphi + act(upper_u(p, lam) * t_mat(p), phi)
    data = (ks, S_inv, tphi)
    weight._hecke_cache[key] = data
    return data


def hecke_T(f: CindElement, variant: str = "default") -> CindElement:
    """T f, computed by expanding each summand through translates of phi and
    applying the pinned value of T on phi equivariantly."""
    w = f.weight
    ks, S_inv, tphi = _hecke_data(w, variant)
    out = CindElement(w)
    for vert, coeffs in f.support.items():
        codes = np.array([c.code for c in coeffs], dtype=np.int64)
        a = xf.mat_vec_codes(w.field, S_inv, codes)
        rep = vert.rep()
        for j, aj in enumerate(a):
            if aj:
                out = out + act(rep * ks[j], tphi).scale(w.field.from_code(int(aj)))
    return out


class HeckeIdeal:
    """A monic polynomial in T over the coefficient field."""

    def __init__(self, field: Field, coeffs):
        coeffs = [field.el(c) for c in coeffs]
        if len(coeffs) < 2 or coeffs[-1] != field.one():
            raise ValueError("ideal generator must be monic of degree >= 1")
        self.field = field
        self.coeffs = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def parse(cls, field: Field, text: str) -> "HeckeIdeal":
        """Accepts "T", "T^n", and "T-c" with c an integer residue."""
        text = text.replace(" ", "")
        if text == "T":
            return cls(field, [0, 1])
        if text.startswith("T^"):
            n = int(text[2:])
            return cls(field, [0] * n + [1])
        if text.startswith("T-"):
            c = field.from_int(int(text[2:]))
            return cls(field, [-c, field.one()])
        if text.startswith("T+"):
            c = field.from_int(int(text[2:]))
            return cls(field, [c, field.one()])
        raise ValueError(f"cannot parse ideal spec {text!r}")

    def apply(self, f: CindElement) -> CindElement:
        out = f.scale(self.coeffs[0])
        power = f
        for c in self.coeffs[1:]:
            power = hecke_T(power)
            out = out + power.scale(c)
        return out

    def __repr__(self):
        bits = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if i == 0:
                bits.append(f"{c}")
            elif i == 1:
                bits.append("T" if c == self.field.one() else f"{c}*T")
            else:
                bits.append(f"T^{i}" if c == self.field.one() else f"{c}*T^{i}")
        return " + ".join(reversed(bits))


# ---------------------------------------------------------------------------
# balls and coordinates
# ---------------------------------------------------------------------------

def ball_vertices(p: int, R: int) -> list:
    """All tree vertices at distance <= R, in a fixed deterministic order."""
    out = [TreeVertex(p, 0, 0)]
    for d in range(-R, R + 1):
        if d != 0 and abs(d) <= R:
            out.append(TreeVertex(p, d, 0))
    # a = c * p^w nonzero, w < d
    for d in range(1, R + 1):
        for w in range(0, d):
            for c in range(1, p ** (d - w)):
                if c % p:
                    out.append(TreeVertex(p, d, Fraction(c) * Fraction(p) ** w))
    for w in range(-1, -(R + 1), -1):
        if w < 1 - R:
            break
        for d in range(w + 1, R + 2 * w + 1):
            for c in range(1, p ** (d - w)):
                if c % p:
                    out.append(TreeVertex(p, d, Fraction(c) * Fraction(p) ** w))
    out = [v for v in out if v.distance() <= R]
    out.sort(key=lambda v: v.sort_key())
    return out


def sphere_size(p: int, n: int) -> int:
    return 1 if n == 0 else (p + 1) * p ** (n - 1)


class BallIndex:
    """Coordinates on the span of basis elements [vertex, e_i] with
    vertex distance <= R."""

    def __init__(self, weight: Weight, R: int):
        self.weight = weight
        self.R = R
        self.vertices = ball_vertices(weight.p, R)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.dim = len(self.vertices) * weight.dim

    def coords(self, f: CindElement) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.int64)
        d = self.weight.dim
        for v, coeffs in f.support.items():
            i = self.index.get(v)
            if i is None:
                raise ValueError(f"support outside ball radius {self.R}: {v}")
            for j, c in enumerate(coeffs):
                out[i * d + j] = c.code
        return out

    def elem(self, codes) -> CindElement:
        d = self.weight.dim
        support = {}
        for i, v in enumerate(self.vertices):
            chunk = [int(c) for c in codes[i * d : (i + 1) * d]]
            if any(chunk):
                support[v] = [self.weight.field.from_code(c) for c in chunk]
        return CindElement(self.weight, support)

    def basis_elements(self):
        d = self.weight.dim
        for v in self.vertices:
            for j in range(d):
                coeffs = [0] * d
                coeffs[j] = 1
                yield CindElement(self.weight, {v: coeffs})


def ideal_matrix(weight: Weight, ideal: HeckeIdeal, R: int):
    """Matrix of ideal(T): ball(R) -> ball(R + deg), columns over the ball
    basis; memoized on the weight since it backs every quotient solve."""
    key = ("idealmat", repr(ideal), R)
    if key in weight._hecke_cache:
        return weight._hecke_cache[key]
    inner = BallIndex(weight, R)
    outer = BallIndex(weight, R + ideal.degree)
    cols = []
    for b in inner.basis_elements():
        cols.append(outer.coords(ideal.apply(b)))
    A = np.array(cols, dtype=np.int64).T if cols else np.zeros((outer.dim, 0), dtype=np.int64)
    weight._hecke_cache[key] = (A, inner, outer)
    return A, inner, outer


# ---------------------------------------------------------------------------
# quotient membership
# ---------------------------------------------------------------------------

class MembershipResult:
    def __init__(self, status, preimage=None, certificate=None, certified_radius=None):
        self.status = status  # "zero" | "nonzero"
        self.preimage = preimage
        self.certificate = certificate
        self.certified_radius = certified_radius

    def __repr__(self):
        return f"<{self.status} @R={self.certified_radius}>"


def _ideal_solver(weight: Weight, ideal: HeckeIdeal, R: int) -> xf.CachedSolver:
    key = ("solver", repr(ideal), R)
    if key not in weight._hecke_cache:
        A, _, _ = ideal_matrix(weight, ideal, R)
        weight._hecke_cache[key] = xf.CachedSolver(weight.field, A)
    return weight._hecke_cache[key]


def quotient_membership(f: CindElement, ideal: HeckeIdeal, R: int,
                        r_max: int = DEFAULT_R_MAX) -> MembershipResult:
    """Decide f in ideal(T).c-Ind with the preimage supported in radius <= R.

    A "zero" answer carries the exact preimage (re-verified by applying the
    ideal); a "nonzero" answer carries an inconsistency certificate and is
    re-checked at radius R + 1.
    """
    if R < f.radius():
        raise ValueError("R must be at least the radius of f")
    if R > r_max:
        raise TruncationError(
            f"truncation too small: radius {R} exceeds R_max={r_max}; raise R_max")

    def try_radius(rr):
        _, inner, outer = ideal_matrix(f.weight, ideal, rr)
        solver = _ideal_solver(f.weight, ideal, rr)
        x, cert = solver.solve(outer.coords(f))
        return x, cert, inner

    x, cert, inner = try_radius(R)
    if x is not None:
        h = inner.elem(x)
        if not (ideal.apply(h) - f).is_zero():
            raise RuntimeError("solver returned an invalid preimage")
        return MembershipResult("zero", preimage=h, certified_radius=R)
    x2, cert2, inner2 = try_radius(R + 1)
    if x2 is not None:
        h = inner2.elem(x2)
        if not (ideal.apply(h) - f).is_zero():
            raise RuntimeError("solver returned an invalid preimage")
        return MembershipResult("zero", preimage=h, certified_radius=R + 1)
    return MembershipResult("nonzero", certificate=cert2, certified_radius=R + 1)


class QuotientElement:
    """A class in c-Ind / ideal(T), held as an explicit representative."""

    def __init__(self, rep: CindElement, ideal: HeckeIdeal, r_max: int = DEFAULT_R_MAX):
        self.rep = rep
        self.ideal = ideal
        self.r_max = r_max

    def is_zero(self) -> bool:
        if self.rep.is_zero():
            return True
        return quotient_membership(
            self.rep, self.ideal, self.rep.radius(), self.r_max).status == "zero"

    def __eq__(self, other):
        if not isinstance(other, QuotientElement):
            return NotImplemented
        return QuotientElement(self.rep - other.rep, self.ideal, self.r_max).is_zero()

    def act(self, g: Mat2) -> "QuotientElement":
        return QuotientElement(act(g, self.rep), self.ideal, self.r_max)

    def hecke(self) -> "QuotientElement":
        return QuotientElement(hecke_T(self.rep), self.ideal, self.r_max)


# ---------------------------------------------------------------------------
# fixed vectors in balls
# ---------------------------------------------------------------------------

def one_mod_p_unit_gens(p: int, N: int) -> list:
    """Generators of the units congruent to 1 mod p, modulo p^N."""
    if N <= 1:
        return []
    if p > 2:
        return [1 + p]
    if N == 2:
        return [3]
    return [2**N - 1, 5]


def full_unit_gens(p: int, N: int) -> list:
    """Generators of all units modulo p^N."""
    if p == 2:
        return one_mod_p_unit_gens(2, N) or [1]
    # a primitive root mod p^2 is primitive mod every p^N
    span = p * p
    target = span - p  # group order mod p^2
    for g in range(2, span):
        if g % p == 0:
            continue
        x, order = g, 1
        while x != 1:
            x = x * g % span
            order += 1
        if order == target:
            return [g]
    raise RuntimeError("no primitive root found")


def i1_generators(p: int, N: int) -> list:
    """Topological generators of the pro-p Iwahori, enough modulo level N."""
    gens = [upper_u(p, 1), lower_u(p, p)]
    for u in one_mod_p_unit_gens(p, N):
        gens.append(diag(p, u, 1))
        gens.append(diag(p, 1, u))
    return gens


def k_generators(p: int, N: int) -> list:
    """Generators of K = GL2(Z_p) modulo level N."""
    gens = [upper_u(p, 1), lower_u(p, 1), s_mat(p)]
    for u in full_unit_gens(p, N):
        gens.append(diag(p, u, 1))
        gens.append(diag(p, 1, u))
    return gens


def k1_check_gens(p: int) -> list:
    gens = [upper_u(p, p), lower_u(p, p), diag(p, 1 + p, 1), diag(p, 1, 1 + p)]
    return gens


def reduce_mod_rows(field: Field, subspace_rows: np.ndarray):
    """Projection-like reducer: returns (rref_rows, pivots, reduce_fn) with
    reduce_fn mapping a coordinate matrix (rows = vectors) to representatives
    modulo the row space."""
    rows = np.asarray(subspace_rows, dtype=np.int64)
    if rows.size == 0:
        eye_reduce = lambda M: np.asarray(M, dtype=np.int64)
        return rows.reshape(0, rows.shape[1] if rows.ndim == 2 else 0), [], eye_reduce
    R, piv = xf.rref(field, rows)
    U = R[: len(piv)]

    def reduce_fn(M):
        M = np.asarray(M, dtype=np.int64).copy()
        for ri, pc in enumerate(piv):
            factors = M[:, pc].copy()
            if np.any(factors):
                upd = xf._np_outer(field, factors, U[ri])
                M = xf._np_sub_mat(field, M, upd)
        return M

    return U, piv, reduce_fn


def i1_fixed_ball(weight: Weight, R: int, ideal: HeckeIdeal | None = None,
                  r_max: int = DEFAULT_R_MAX) -> list:
    """Basis of pro-p-Iwahori-fixed elements supported in radius <= R, in the
    quotient by the ideal when one is given.

    Fixedness is solved against generators modulo the congruence level
    N = R + 1 (the principal congruence subgroup of that level acts trivially
    on the ball) and re-checked at level N + 1 for stabilization.
    """
    if R > r_max:
        raise TruncationError(f"truncation too small: R={R} exceeds R_max={r_max}")
    ball = BallIndex(weight, R)
    field = weight.field

    if ideal is not None and R - ideal.degree >= 0:
        inner = BallIndex(weight, R - ideal.degree)
        cols = [ball.coords(ideal.apply(b)) for b in inner.basis_elements()]
        U_rows = np.array(cols, dtype=np.int64) if cols else np.zeros((0, ball.dim), dtype=np.int64)
        _, _, reduce_fn = reduce_mod_rows(field, U_rows)
    else:
        reduce_fn = lambda M: M

    def condition_matrix(level):
        blocks = []
        eye = np.eye(ball.dim, dtype=np.int64)
        for g in i1_generators(weight.p, level):
            M = np.zeros((ball.dim, ball.dim), dtype=np.int64)
            for j, b in enumerate(ball.basis_elements()):
                M[:, j] = ball.coords(act(g, b))
            diff = xf._np_sub_mat(field, M, eye)
            blocks.append(reduce_fn(diff.T).T)
        return np.concatenate(blocks)

    kern = xf.kernel_codes(field, condition_matrix(R + 1))
    kern2 = xf.kernel_codes(field, condition_matrix(R + 2))
    if kern.shape[0] != kern2.shape[0] or xf.rank_codes(
            field, np.concatenate([kern, kern2])) != kern.shape[0]:
        raise RuntimeError("fixed space did not stabilize across levels")
    if ideal is None:
        return [ball.elem(row) for row in kern]
    # in the quotient, keep one representative per class: reduce the kernel
    # modulo the ideal image (which is stable under the compact action) and
    # drop representatives that die in the quotient
    span = xf.IncrementalSpan(field, ball.dim)
    out = []
    for row in kern:
        reduced = reduce_fn(row[None, :])[0]
        if np.any(reduced) and span.add(reduced):
            out.append(ball.elem(reduced))
    return out
