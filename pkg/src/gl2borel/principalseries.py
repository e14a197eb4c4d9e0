"""Smooth principal series induced from a tame torus character, modeled at
finite level by tables on P^1(Z/p^N).

A level-N function is right-invariant under the principal congruence subgroup
of level N; its points are [x : 1] for x in Z/p^N and [1 : p y] for y in
Z/p^(N-1), with exact matrix representatives lower-u(x) and s u(p y).  The
group acts by right translation on arguments; each action raises the level by
at most v(det g) - 2 min-valuation(g), and evaluation routes through exact
rational representatives so the chi-cocycle is never approximated.
"""

from __future__ import annotations

import numpy as np

from . import exactfield as xf
from .exactfield import FieldElem
from .fqweights import TorusCharacter
from .padicmat import Mat2, PadicRational, diag, lower_u, s_mat, t_mat, upper_u
from .compactind import one_mod_p_unit_gens

DEFAULT_N_MAX = 4


class LevelOverflowError(ValueError):
    pass


class ModelInconsistencyError(RuntimeError):
    pass


def ps_points(p: int, N: int) -> list:
    """Points of P^1(Z/p^N) in table order: affine then infinity branch."""
    return [("a", x) for x in range(p**N)] + [("i", y) for y in range(p ** (N - 1))]


def point_rep(p: int, point) -> Mat2:
    kind, val = point
    if kind == "a":
        return lower_u(p, val)
    return s_mat(p) * upper_u(p, p * val)


def level_shift(g: Mat2) -> int:
    """How many levels a right translation by g can cost (= tree_distance of
    the central rescaling; symmetric in g and its inverse)."""
    return int(g.det().valuation) - 2 * int(g.min_valuation())


class PSFunction:
    """A level-N vector of the principal series attached to chi."""

    __slots__ = ("chi", "level", "table", "n_max")

    def __init__(self, chi: TorusCharacter, level: int, table, n_max: int = DEFAULT_N_MAX):
        if level < 1:
            raise ValueError("level must be >= 1")
        self.chi = chi
        self.level = level
        self.table = np.asarray(table, dtype=np.int64)
        expected = chi.p**level + chi.p ** (level - 1)
        if self.table.shape != (expected,):
            raise ValueError("table size does not match the level")
        self.n_max = n_max

    @classmethod
    def zero(cls, chi, level=1, n_max: int = DEFAULT_N_MAX):
        p = chi.p
        return cls(chi, level, np.zeros(p**level + p ** (level - 1), dtype=np.int64), n_max)

    @property
    def field(self):
        return self.chi.field

    @property
    def p(self):
        return self.chi.p

    def is_zero(self) -> bool:
        return not np.any(self.table)

    def value(self, point) -> FieldElem:
        return self.field.from_code(int(self.table[point_index(self.p, self.level, point)]))

    def refine(self, to_level: int) -> "PSFunction":
        """Pull back to a finer level (no-op on the function it represents)."""
        if to_level < self.level:
            raise ValueError("cannot coarsen a table")
        if to_level > self.n_max:
            raise LevelOverflowError("level overflow")
        if to_level == self.level:
            return self
        p = self.p
        out = np.zeros(p**to_level + p ** (to_level - 1), dtype=np.int64)
        for i, pt in enumerate(ps_points(p, to_level)):
            red = reduce_point(p, pt, self.level)
            out[i] = self.table[point_index(p, self.level, red)]
        return PSFunction(self.chi, to_level, out, self.n_max)

    def _pair(self, other):
        if not isinstance(other, PSFunction) or other.chi != self.chi:
            raise ValueError("mismatched principal-series vectors")
        lv = max(self.level, other.level)
        return self.refine(lv), other.refine(lv)

    def __add__(self, other):
        a, b = self._pair(other)
        if self.field.k == 1:
            table = (a.table + b.table) % self.field.p
        else:
            table = np.array([self.field.add_codes(int(x), int(y))
                              for x, y in zip(a.table, b.table)], dtype=np.int64)
        return PSFunction(self.chi, a.level, table, self.n_max)

    def __neg__(self):
        return self.scale(self.field.from_int(-1))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PSFunction":
        c = self.field.el(c) if not isinstance(c, FieldElem) else c
        if self.field.k == 1:
            table = (self.table * c.code) % self.field.p
        else:
            table = np.array([self.field.mul_codes(int(x), c.code) for x in self.table],
                             dtype=np.int64)
        return PSFunction(self.chi, self.level, table, self.n_max)

    def __eq__(self, other):
        if not isinstance(other, PSFunction):
            return NotImplemented
        a, b = self._pair(other)
        return bool(np.array_equal(a.table, b.table))

    def __repr__(self):
        return f"<PS chi={self.chi} level={self.level}>"

    def serialize(self):
        return {
            "chi": repr(self.chi),
            "level": self.level,
            "values": [int(c) for c in self.table],
        }


def point_index(p: int, N: int, point) -> int:
    kind, val = point
    if kind == "a":
        return val
    return p**N + val


def reduce_point(p: int, point, to_level: int):
    kind, val = point
    if kind == "a":
        return ("a", val % p**to_level)
    return ("i", val % p ** (to_level - 1))


def evaluate(f: PSFunction, g: Mat2) -> FieldElem:
    """Exact evaluation of the smooth function at an arbitrary group element:
    factor g = b . rep through the exact representative of its coset point."""
    p = f.p
    c, d = g.c, g.d
    if d.valuation <= c.valuation:
        x = c / d
        b = g * lower_u(p, -x)
        pt = ("a", x.residue(f.level))
    else:
        w = d / c
        rep = s_mat(p) * upper_u(p, w)
        b = g * rep.inv()
        y = w / p
        pt = ("i", y.residue(f.level - 1) if f.level > 1 else 0)
    return f.chi.value_upper(b) * f.value(pt)


def ps_act(g: Mat2, f: PSFunction) -> PSFunction:
    """Right translation: (g . f)(x) = f(x g), tabulated at the raised level."""
    new_level = f.level + level_shift(g)
    if new_level > f.n_max:
        raise LevelOverflowError(
            f"level overflow: need level {new_level} > N_max={f.n_max}")
    p = f.p
    out = np.zeros(p**new_level + p ** (new_level - 1), dtype=np.int64)
    for i, pt in enumerate(ps_points(p, new_level)):
        out[i] = evaluate(f, point_rep(p, pt) * g).code
    return PSFunction(f.chi, new_level, out, f.n_max)


def eval_at_identity(f: PSFunction) -> FieldElem:
    return f.value(("a", 0))


def make_phi1(chi: TorusCharacter, n_max: int = DEFAULT_N_MAX) -> PSFunction:
    """The pro-p-Iwahori-fixed function supported on P.I1 with value 1 at 1."""
    p = chi.p
    table = np.zeros(p + 1, dtype=np.int64)
    table[0] = 1  # the point [0:1]; all other level-1 points lie off P.I1
    return PSFunction(chi, 1, table, n_max)


def make_phi2(chi: TorusCharacter, n_max: int = DEFAULT_N_MAX) -> PSFunction:
    """Sum over lambda of u(lift(lambda)) s applied to phi1."""
    p = chi.p
    phi1 = make_phi1(chi, n_max)
    out = PSFunction.zero(chi, 1, n_max)
    for lam in range(p):
        out = out + ps_act(upper_u(p, lam) * s_mat(p), phi1)
    return out


def i1_generators_ps(p: int, level: int) -> list:
    gens = [upper_u(p, 1), lower_u(p, p)]
    for u in one_mod_p_unit_gens(p, level):
        gens.append(diag(p, u, 1))
        gens.append(diag(p, 1, u))
    return gens


def basis_functions(chi: TorusCharacter, N: int, n_max: int = DEFAULT_N_MAX):
    p = chi.p
    dim = p**N + p ** (N - 1)
    for j in range(dim):
        table = np.zeros(dim, dtype=np.int64)
        table[j] = 1
        yield PSFunction(chi, N, table, n_max)


def action_matrix(chi: TorusCharacter, g: Mat2, N: int, n_max: int = DEFAULT_N_MAX):
    """Matrix of ps_act(g, .) from level N to level N + shift, on code tables."""
    cols = [ps_act(g, b).table for b in basis_functions(chi, N, n_max)]
    return np.array(cols, dtype=np.int64).T


def refine_matrix(chi: TorusCharacter, N: int, to_level: int, n_max: int = DEFAULT_N_MAX):
    cols = [b.refine(to_level).table for b in basis_functions(chi, N, n_max)]
    return np.array(cols, dtype=np.int64).T


def i1_invariants(chi: TorusCharacter, N: int, n_max: int = DEFAULT_N_MAX) -> list:
    """Basis of the pro-p-Iwahori-fixed vectors at level N."""
    field = chi.field
    eye = np.eye(chi.p**N + chi.p ** (N - 1), dtype=np.int64)
    blocks = []
    for g in i1_generators_ps(chi.p, N):
        M = action_matrix(chi, g, N, n_max)
        blocks.append(xf._np_sub_mat(field, M, eye))
    kern = xf.kernel_codes(field, np.concatenate(blocks))
    return [PSFunction(chi, N, row, n_max) for row in kern]


def eigen_relation(chi: TorusCharacter, n_max: int = DEFAULT_N_MAX) -> FieldElem:
    """The nonzero scalar with sum_mu u(lift(mu)) t . phi2 = lambda . phi2."""
    p = chi.p
    phi2 = make_phi2(chi, n_max)
    w = PSFunction.zero(chi, 2, n_max)
    for mu in range(p):
        w = w + ps_act(upper_u(p, mu) * t_mat(p), phi2)
    phi2r = phi2.refine(w.level)
    nz = np.nonzero(phi2r.table)[0]
    if nz.size == 0:
        raise ModelInconsistencyError("model inconsistency: phi2 vanished")
    field = chi.field
    lam_code = field.mul_codes(int(w.table[nz[0]]), field.inv_code(int(phi2r.table[nz[0]])))
    lam = field.from_code(lam_code)
    if not (w - phi2r.scale(lam)).is_zero():
        raise ModelInconsistencyError("model inconsistency: sum not proportional to phi2")
    if lam.is_zero():
        raise ModelInconsistencyError("model inconsistency: eigenvalue zero")
    return lam


# ---------------------------------------------------------------------------
# the determinant-character splitting
# ---------------------------------------------------------------------------

class DetSplitting:
    """For chi = psi o det: the P-equivariant projector and section of the
    evaluation sequence, and the dictionary between its kernel and the
    Steinberg model inside the trivial principal series."""

    def __init__(self, chi: TorusCharacter, n_max: int = DEFAULT_N_MAX):
        if not chi.is_det_twist():
            raise ValueError("character does not factor through det")
        self.chi = chi
        self.exponent = chi.i1
        self.scalar = chi.s1  # value of psi at p
        self.n_max = n_max
        self.trivial = TorusCharacter.trivial(chi.field)

    def psi_hat(self, x: PadicRational) -> FieldElem:
        """psi extended to Q^x by psi(p) = scalar."""
        field = self.chi.field
        return self.scalar ** x.valuation * field.from_int(x.unit_residue()) ** self.exponent

    def det_function(self, level: int = 1) -> PSFunction:
        """The G-eigenfunction g |-> psi(det g), tabulated."""
        p = self.chi.p
        table = [self.psi_hat(point_rep(p, pt).det()).code
                 for pt in ps_points(p, level)]
        return PSFunction(self.chi, level, np.array(table, dtype=np.int64), self.n_max)

    def project(self, f: PSFunction) -> FieldElem:
        return eval_at_identity(f)

    def include(self, c, level: int = 1) -> PSFunction:
        return self.det_function(level).scale(c)

    def kappa_part(self, f: PSFunction) -> PSFunction:
        return f - self.include(self.project(f), f.level)

    def to_steinberg(self, f: PSFunction) -> PSFunction:
        """Pointwise division by psi(det): lands in the trivial-character
        series, intertwining the action up to the psi(det g) twist."""
        p = self.chi.p
        field = self.chi.field
        table = []
        for i, pt in enumerate(ps_points(p, f.level)):
            fac = self.psi_hat(point_rep(p, pt).det()).inv()
            table.append(field.mul_codes(int(f.table[i]), fac.code))
        return PSFunction(self.trivial, f.level, np.array(table, dtype=np.int64), self.n_max)

    def from_steinberg(self, f: PSFunction) -> PSFunction:
        p = self.chi.p
        field = self.chi.field
        table = []
        for i, pt in enumerate(ps_points(p, f.level)):
            fac = self.psi_hat(point_rep(p, pt).det())
            table.append(field.mul_codes(int(f.table[i]), fac.code))
        return PSFunction(self.chi, f.level, np.array(table, dtype=np.int64), self.n_max)


def split_for_det_character(chi: TorusCharacter, n_max: int = DEFAULT_N_MAX) -> DetSplitting:
    return DetSplitting(chi, n_max)


def in_kappa(f: PSFunction) -> bool:
    return eval_at_identity(f).is_zero()


def random_ps_function(chi: TorusCharacter, N: int, rng, n_max: int = DEFAULT_N_MAX) -> PSFunction:
    p = chi.p
    dim = p**N + p ** (N - 1)
    table = np.array([rng.randrange(chi.field.size) for _ in range(dim)], dtype=np.int64)
    return PSFunction(chi, N, table, n_max)
