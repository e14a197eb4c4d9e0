import random

import numpy as np
import pytest

from gl2borel.exactfield import (
    CachedSolver,
    Field,
    IncrementalSpan,
    field_arith,
    kernel_codes,
    matrix_relation_kernel,
    rank_codes,
    rref,
    solve_codes,
    solve_linear,
)


def test_prime_field_examples():
    F5 = Field(5)
    assert field_arith(F5.el(2), None, "inv") == F5.el(3)
    F3 = Field(3)
    assert field_arith(F3.el(2), F3.el(2), "add") == F3.el(1)


def test_extension_field_example():
    F4 = Field(2, 2, modulus=(1, 1, 1))  # x^2 + x + 1
    x = F4.gen()
    assert field_arith(x, x, "mul") == x + 1


def test_invalid_parameters():
    with pytest.raises(ValueError):
        Field(4)
    with pytest.raises(ValueError):
        Field(17)
    with pytest.raises(ValueError):
        Field(2, 2, modulus=(0, 0, 1))  # x^2 is reducible
    with pytest.raises(ValueError):
        Field(2, 2, modulus=(1, 1))  # wrong degree


def test_division_by_zero_and_mismatch():
    F3, F5 = Field(3), Field(5)
    with pytest.raises(ZeroDivisionError, match="division by zero"):
        field_arith(F3.zero(), None, "inv")
    with pytest.raises(ValueError, match="field mismatch"):
        field_arith(F3.one(), F5.one(), "add")


@pytest.mark.parametrize("p,k", [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2), (2, 4)])
def test_field_axioms_random(p, k):
    F = Field(p, k)
    rng = random.Random(p * 10 + k)
    for _ in range(1000 // k):
        a = F.from_code(rng.randrange(F.size))
        b = F.from_code(rng.randrange(F.size))
        c = F.from_code(rng.randrange(F.size))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        if not a.is_zero():
            assert a.inv() * a == F.one()


def test_solve_examples():
    F2 = Field(2)
    res = solve_linear([[F2.one(), F2.zero()], [F2.zero(), F2.one()]],
                       [F2.one(), F2.zero()])
    assert res.status == "solution"
    assert [e.code for e in res.solution] == [1, 0]
    assert res.kernel == []

    res = solve_linear([[F2.zero(), F2.zero()], [F2.zero(), F2.zero()]],
                       [F2.one(), F2.zero()])
    assert res.status == "no-solution"
    assert res.certificate is not None
    # certificate: v A = 0 and v . rhs != 0 holds by construction
    v = res.certificate
    assert (v[0] * 1 + v[1] * 0) == F2.one()

    F3 = Field(3)
    res = solve_linear([[F3.el(1), F3.el(1)], [F3.el(2), F3.el(2)]],
                       [F3.zero(), F3.zero()])
    assert res.status == "solution"
    assert [[e.code for e in k] for k in res.kernel] == [[1, 2]]


def test_dimension_mismatch():
    F2 = Field(2)
    with pytest.raises(ValueError):
        solve_linear([[F2.one()], [F2.one(), F2.zero()]], [F2.one(), F2.zero()])
    with pytest.raises(ValueError):
        solve_linear([[F2.one(), F2.zero()]], [F2.one(), F2.zero()])


@pytest.mark.parametrize("p", [2, 3])
def test_solver_against_enumeration(p):
    """Brute-force oracle: enumerate all vectors of F_p^3 and compare the
    full solution set with what solve_linear reports."""
    F = Field(p)
    rng = random.Random(p)
    for _ in range(25):
        A = [[rng.randrange(p) for _ in range(3)] for _ in range(3)]
        b = [rng.randrange(p) for _ in range(3)]
        truth = []
        for code in range(p**3):
            x = [(code // p**i) % p for i in range(3)]
            if all(sum(A[i][j] * x[j] for j in range(3)) % p == b[i] % p
                   for i in range(3)):
                truth.append(tuple(x))
        res = solve_linear([[F.el(v) for v in row] for row in A],
                           [F.el(v) for v in b])
        if not truth:
            assert res.status == "no-solution"
            v = res.certificate
            assert all(
                sum(v[i].code * A[i][j] for i in range(3)) % p == 0 for j in range(3))
            assert sum(v[i].code * b[i] for i in range(3)) % p != 0
        else:
            assert res.status == "solution"
            sol = tuple(e.code for e in res.solution)
            assert sol in truth
            assert len(truth) == p ** len(res.kernel)
            # every kernel shift stays a solution
            for kv in res.kernel:
                shifted = tuple((s + k.code) % p for s, k in zip(sol, kv))
                assert shifted in truth


def test_cached_solver_matches_direct():
    F = Field(3)
    rng = random.Random(9)
    A = np.array([[rng.randrange(3) for _ in range(4)] for _ in range(6)],
                 dtype=np.int64)
    solver = CachedSolver(F, A)
    for _ in range(50):
        b = np.array([rng.randrange(3) for _ in range(6)], dtype=np.int64)
        x1, cert1 = solver.solve(b)
        x2, _, cert2 = solve_codes(F, A, b)
        assert (x1 is None) == (x2 is None)
        if x1 is not None:
            assert np.array_equal((A @ x1) % 3, b % 3)
        else:
            assert np.all((cert1 @ A) % 3 == 0) and (cert1 @ b) % 3 != 0


def test_incremental_span():
    F = Field(5)
    span = IncrementalSpan(F, 4)
    assert span.add([1, 2, 0, 0])
    assert not span.add([2, 4, 0, 0])
    assert span.add([0, 0, 1, 1])
    assert span.dim == 2
    assert span.contains([3, 1, 2, 2])
    assert not span.contains([0, 1, 0, 0])


def test_matrix_relation_kernel_commutant():
    # the commutant of a cyclic permutation plus a generic diagonal is scalar
    F = Field(5)
    P = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=np.int64)
    D = np.diag([1, 2, 3]).astype(np.int64)
    basis = matrix_relation_kernel(F, [(P, P), (D, D)], 3, 3)
    assert len(basis) == 1
    M = basis[0]
    assert np.array_equal(M, M[0, 0] * np.eye(3, dtype=np.int64) % 5)


def test_rref_determinism_and_rank():
    F = Field(3)
    A = np.array([[1, 2, 0], [0, 1, 1], [0, 0, 1]], dtype=np.int64)
    R1, p1 = rref(F, A)
    R2, p2 = rref(F, A)
    assert np.array_equal(R1, R2) and p1 == p2
    assert rank_codes(F, A) == 3
    assert kernel_codes(F, A).shape[0] == 0
    # the singular variant drops rank and gains a kernel line
    B = np.array([[1, 2, 0], [2, 1, 1], [0, 0, 1]], dtype=np.int64)  # det = -3
    assert rank_codes(F, B) == 2
    assert kernel_codes(F, B).shape[0] == 1
