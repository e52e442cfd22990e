import numpy as np
import pytest

from interplab.numerics import (
    NoConvergence,
    RankDeficient,
    SeedSpec,
    derive_stream,
    gram_solve,
    op_norm,
)


def test_stream_determinism():
    a = derive_stream(SeedSpec(42, "trial", 0)).normals(1000)
    b = derive_stream(SeedSpec(42, "trial", 0)).normals(1000)
    assert np.array_equal(a, b)


def test_streams_distinct_across_label_and_index():
    base = derive_stream(SeedSpec(42, "trial", 0)).normals(1)
    assert derive_stream(SeedSpec(42, "trial", 1)).normals(1) != base
    assert derive_stream(SeedSpec(42, "other", 0)).normals(1) != base
    assert derive_stream(SeedSpec(43, "trial", 0)).normals(1) != base


def test_normal_moments_one_million():
    # 3-sigma band for the mean of 1e6 standard normals is 3e-3.
    x = derive_stream(SeedSpec(1, "m", 0)).normals(10**6)
    assert abs(x.mean()) <= 3e-3
    assert abs(x.var() - 1.0) <= 3.0 * np.sqrt(2.0 / 10**6)


def test_uniforms_open_interval():
    u = derive_stream(SeedSpec(9, "u", 0)).uniforms(10**5)
    assert u.min() > 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) <= 3.0 / np.sqrt(12.0 * 10**5)


def test_child_spec_is_pure():
    spec = SeedSpec(7, "a", 3)
    assert spec.child("b", 1) == SeedSpec(7, "a/b", 1)


def test_seed_spec_validation():
    with pytest.raises(ValueError):
        SeedSpec(-1, "x", 0)
    with pytest.raises(ValueError):
        SeedSpec(2**64, "x", 0)
    with pytest.raises(ValueError):
        SeedSpec(0, "x", -2)


def test_gram_solve_identity():
    assert np.allclose(gram_solve(np.eye(2), np.array([3.0, 4.0])), [3.0, 4.0])


def test_gram_solve_single_row_by_hand():
    # X X^T = 2, so a = 1.
    a = gram_solve(np.array([[1.0, 1.0]]), np.array([2.0]))
    assert np.allclose(a, [1.0])


def test_gram_solve_duplicate_rows_rank_deficient():
    X = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
    with pytest.raises(RankDeficient):
        gram_solve(X, np.array([1.0, 1.0]))


def test_gram_solve_residual_on_random_instances():
    stream = derive_stream(SeedSpec(5, "gram", 0))
    for _ in range(50):
        n = 2 + int(stream.uniforms() * 14)
        X = stream.normals((n, 2 * n))
        y = stream.normals(n)
        a = gram_solve(X, y)
        gram = X @ X.T
        assert np.linalg.norm(gram @ a - y) <= 1e-8 * np.linalg.norm(y)


def test_gram_solve_rejects_nonfinite():
    with pytest.raises(ValueError):
        gram_solve(np.array([[np.nan, 1.0]]), np.array([1.0]))


def test_op_norm_examples():
    assert op_norm(np.eye(4)) == pytest.approx(1.0)
    assert op_norm(np.diag([3.0, 4.0])) == pytest.approx(4.0)
    # Rank one: ||row|| * sqrt(2).
    assert op_norm(np.array([[1.0, 1.0], [1.0, 1.0]])) == pytest.approx(2.0)


def test_op_norm_scaling_and_bounds():
    stream = derive_stream(SeedSpec(6, "opnorm", 0))
    for _ in range(25):
        M = stream.normals((7, 12))
        v = op_norm(M, rel_tol=1e-10)
        c = float(stream.uniforms() * 5 + 0.1)
        assert op_norm(c * M, rel_tol=1e-10) == pytest.approx(c * v, rel=1e-8)
        assert v >= np.max(np.linalg.norm(M, axis=0))
        assert v <= np.linalg.norm(M)


def test_op_norm_matches_svd():
    stream = derive_stream(SeedSpec(8, "opnorm-svd", 0))
    for _ in range(25):
        M = stream.normals((6, 9))
        top = np.linalg.svd(M, compute_uv=False)[0]
        assert op_norm(M, rel_tol=1e-10) == pytest.approx(top, rel=1e-8)


def test_op_norm_iteration_cap():
    with pytest.raises(NoConvergence):
        op_norm(np.diag([2.0, 1.0]), rel_tol=1e-12, max_iterations=1)


def test_op_norm_zero_matrix():
    assert op_norm(np.zeros((3, 3))) == 0.0
