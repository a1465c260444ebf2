import numpy as np
import pytest

from fqsvt.linalg import (
    StateVector,
    eigh,
    haar_state,
    hermitian_from_spectrum,
    matfun,
    matrix_from_json,
    matrix_to_json,
    random_hermitian,
    rng,
    trace_norm,
)


def test_eigh_diagonal_sorts_ascending():
    spec = eigh(np.diag([0.9, 0.1]))
    assert np.allclose(spec.values, [0.1, 0.9])
    assert np.allclose(np.abs(spec.vectors), [[0, 1], [1, 0]])


def test_eigh_pauli_x():
    spec = eigh(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(spec.values, [-1.0, 1.0])
    v0 = spec.vectors[:, 0] * np.sign(spec.vectors[0, 0])
    v1 = spec.vectors[:, 1] * np.sign(spec.vectors[0, 1])
    assert np.allclose(v0, [1 / np.sqrt(2), -1 / np.sqrt(2)])
    assert np.allclose(v1, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_eigh_random_reconstruction():
    gen = rng(3)
    h = random_hermitian(8, gen)
    spec = eigh(h)
    scale = max(1.0, np.max(np.abs(h)))
    assert np.max(np.abs(spec.reconstruct() - h)) <= 1e-10 * scale


def test_eigh_rejects_non_square():
    with pytest.raises(ValueError, match="square"):
        eigh(np.ones((2, 3)))


def test_eigh_rejects_non_hermitian_with_entry():
    bad = np.array([[1.0, 2.0], [0.5, 1.0]])
    with pytest.raises(ValueError, match=r"\(0, 1\)|\(1, 0\)"):
        eigh(bad)


def test_eigh_reconstruction_sweep():
    # 1000 random Hermitian matrices up to 32x32, residual <= 1e-10.
    gen = rng(4)
    worst = 0.0
    for _ in range(1000):
        dim = int(gen.integers(2, 33))
        h = random_hermitian(dim, gen)
        spec = eigh(h)
        scale = max(1.0, np.max(np.abs(h)))
        worst = max(worst, np.max(np.abs(spec.reconstruct() - h)) / scale)
        assert np.all(np.diff(spec.values) >= 0)
    assert worst <= 1e-10


def test_matfun_identity_and_scalar():
    gen = rng(5)
    h = random_hermitian(4, gen)
    assert np.allclose(matfun(h, lambda x: x), h)
    assert np.allclose(matfun(np.diag([0.25]), np.sqrt), np.diag([0.5]))


def test_matfun_square_matches_product():
    gen = rng(6)
    h = random_hermitian(4, gen)
    assert np.max(np.abs(matfun(h, lambda x: x * x) - h @ h)) < 1e-12


def test_matfun_homomorphism():
    gen = rng(7)
    h = random_hermitian(6, gen, scale=0.3)
    g1 = lambda x: np.exp(x)
    g2 = lambda x: x**2 + 1
    lhs = matfun(h, g1) @ matfun(h, g2)
    rhs = matfun(h, lambda x: g1(x) * g2(x))
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_matfun_rejects_nonfinite_value():
    with pytest.raises(ValueError, match="not finite"):
        matfun(np.diag([0.0, 1.0]), lambda x: 1.0 / x if x else float("nan"))


def test_trace_norm_identity_zero_rank1():
    assert trace_norm(np.eye(7)) == pytest.approx(7.0, abs=1e-12)
    assert trace_norm(np.zeros((3, 5))) == 0.0
    u = haar_state(2, 1).amplitudes
    v = haar_state(2, 2).amplitudes
    assert trace_norm(np.outer(u, v.conj())) == pytest.approx(1.0, abs=1e-10)


def test_trace_norm_unitary_invariance():
    gen = rng(8)
    a = gen.standard_normal((5, 5)) + 1j * gen.standard_normal((5, 5))
    u = eigh(random_hermitian(5, gen)).vectors
    w = eigh(random_hermitian(5, gen)).vectors
    assert trace_norm(u @ a @ w) == pytest.approx(trace_norm(a), abs=1e-10)


def test_haar_state_reproducible_and_distinct():
    a = haar_state(1, seed=7)
    b = haar_state(1, seed=7)
    c = haar_state(1, seed=8)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert not np.allclose(a.amplitudes, c.amplitudes)
    assert a.norm == pytest.approx(1.0, abs=1e-12)


def test_haar_state_component_moments():
    # |a_i|^2 is Beta(1, K-1) under the flat measure: mean 1/K,
    # second moment 2/(K(K+1)).
    qubits, draws = 2, 10000
    dim = 2**qubits
    mags = np.empty((draws, dim))
    for t in range(draws):
        mags[t] = np.abs(haar_state(qubits, seed=42, stream=t).amplitudes) ** 2
    mean = mags.mean()
    var_single = (dim - 1) / (dim**2 * (dim + 1))
    sigma = np.sqrt(var_single / (draws * dim))
    assert abs(mean - 1.0 / dim) <= 3 * sigma
    second = (mags**2).mean()
    assert second == pytest.approx(2.0 / (dim * (dim + 1)), rel=0.05)


def test_haar_state_unitary_invariance_statistic():
    gen = rng(9)
    u = eigh(random_hermitian(4, gen)).vectors
    probe = np.zeros(4, dtype=complex)
    probe[0] = 1.0
    raw, rotated = [], []
    for t in range(4000):
        amp = haar_state(2, seed=13, stream=t).amplitudes
        raw.append(abs(np.vdot(probe, amp)) ** 2)
        rotated.append(abs(np.vdot(probe, u @ amp)) ** 2)
    # Overlap statistics with any fixed state agree within Monte Carlo error.
    se = np.std(raw) / np.sqrt(len(raw))
    assert abs(np.mean(raw) - np.mean(rotated)) <= 4 * se


def test_state_vector_validation():
    with pytest.raises(ValueError, match="amplitudes"):
        StateVector(2, [1.0, 0.0])
    sv = StateVector(1, [3.0, 4.0])
    assert sv.norm == pytest.approx(5.0)
    assert sv.normalized().norm == pytest.approx(1.0)


def test_matrix_json_round_trip():
    gen = rng(10)
    a = gen.standard_normal((3, 2)) + 1j * gen.standard_normal((3, 2))
    doc = matrix_to_json(a)
    assert doc["rows"] == 3 and doc["cols"] == 2
    assert np.array_equal(matrix_from_json(doc), a)


def test_hermitian_from_spectrum_matches_values():
    gen = rng(11)
    values = [0.1, 0.4, 0.7, 0.9]
    h = hermitian_from_spectrum(values, gen)
    assert np.allclose(eigh(h).values, values)
