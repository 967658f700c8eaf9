"""Raw pair-summation kernels: backend equivalence, thread invariance,
coincidence guards, and brute-force agreement."""

import numpy as np
import pytest

from coopdipole._kernels import (
    BACKEND,
    MIN_SEPARATION,
    CoincidentPointError,
    apply_interaction,
    available_backends,
    coupling_matrix,
    lattice_green_sum,
    resolve_threads,
    scattered_field_raw,
)
from coopdipole.core import K
from coopdipole.greens import green_tensor

from helpers import brute_matvec, brute_scattered

BOTH = len(available_backends()) == 2


def _random_cloud(rng, n, spread=2.0, min_gap=0.05):
    """Random positions with a guaranteed pairwise gap."""
    pts = [rng.uniform(-spread, spread, size=3)]
    while len(pts) < n:
        cand = rng.uniform(-spread, spread, size=3)
        if min(np.linalg.norm(cand - p) for p in pts) > min_gap:
            pts.append(cand)
    return np.array(pts)


def test_backend_report():
    print(f"active backend: {BACKEND}, available: {available_backends()}")
    assert BACKEND in ("compiled", "python")
    assert "python" in available_backends()


def test_backends_agree(rng):
    if not BOTH:
        pytest.skip("only one backend available")
    positions = _random_cloud(rng, 40)
    weights = rng.normal(size=(40, 3)) + 1j * rng.normal(size=(40, 3))
    couplings = rng.normal(size=40) + 1j * rng.normal(size=40)
    points = rng.uniform(-3, 3, size=(25, 3)) + np.array([0, 0, 6.0])
    sites = _random_cloud(rng, 60)

    pairs = [
        ("apply_interaction",
         apply_interaction(positions, weights, backend="compiled"),
         apply_interaction(positions, weights, backend="python")),
        ("scattered_field_raw",
         scattered_field_raw(points, positions, weights, backend="compiled"),
         scattered_field_raw(points, positions, weights, backend="python")),
        ("coupling_matrix",
         coupling_matrix(positions, couplings, backend="compiled"),
         coupling_matrix(positions, couplings, backend="python")),
        ("lattice_green_sum",
         lattice_green_sum(sites, (0.3, -0.2), backend="compiled"),
         lattice_green_sum(sites, (0.3, -0.2), backend="python")),
    ]
    for name, compiled, fallback in pairs:
        scale = np.abs(compiled).max()
        diff = np.abs(compiled - fallback).max() / scale
        print(f"{name}: backend relative difference {diff:.3e}")
        assert diff < 1e-13


def test_thread_count_does_not_change_bits(rng):
    positions = _random_cloud(rng, 30)
    weights = rng.normal(size=(30, 3)) + 1j * rng.normal(size=(30, 3))
    couplings = rng.normal(size=30) + 1j * rng.normal(size=30)
    points = rng.uniform(-2, 2, size=(15, 3)) + np.array([0, 0, 5.0])
    sites = _random_cloud(rng, 50)

    assert np.array_equal(
        apply_interaction(positions, weights, threads=1),
        apply_interaction(positions, weights, threads=3),
    )
    assert np.array_equal(
        scattered_field_raw(points, positions, weights, threads=1),
        scattered_field_raw(points, positions, weights, threads=3),
    )
    assert np.array_equal(
        coupling_matrix(positions, couplings, threads=1),
        coupling_matrix(positions, couplings, threads=3),
    )
    assert np.array_equal(
        lattice_green_sum(sites, (0.1, 0.2), threads=1),
        lattice_green_sum(sites, (0.1, 0.2), threads=3),
    )


def test_apply_interaction_against_brute_force(rng):
    positions = _random_cloud(rng, 14)
    vec = rng.normal(size=(14, 3)) + 1j * rng.normal(size=(14, 3))
    got = apply_interaction(positions, vec)
    expected = brute_matvec(positions, np.ones(14), vec,
                            lambda a, b: green_tensor(a, b, K))
    assert np.abs(got - expected).max() < 1e-12 * np.abs(expected).max()


def test_scattered_field_against_brute_force(rng):
    positions = _random_cloud(rng, 10)
    weights = rng.normal(size=(10, 3)) + 1j * rng.normal(size=(10, 3))
    points = rng.uniform(-2, 2, size=(8, 3)) + np.array([0, 0, 4.0])
    got = scattered_field_raw(points, positions, weights)
    expected = brute_scattered(points, positions, weights,
                               lambda a, b: green_tensor(a, b, K))
    assert np.abs(got - expected).max() < 1e-12 * np.abs(expected).max()


def test_coupling_matrix_blocks(rng):
    positions = _random_cloud(rng, 6)
    couplings = rng.normal(size=6) + 1j * rng.normal(size=6)
    mat = coupling_matrix(positions, couplings)
    assert mat.shape == (18, 18)
    for m in range(6):
        block = mat[3 * m:3 * m + 3, 3 * m:3 * m + 3]
        assert np.all(block == 0.0)
    m, n = 1, 4
    block = mat[3 * m:3 * m + 3, 3 * n:3 * n + 3]
    expected = couplings[n] * green_tensor(positions[m], positions[n], K)
    assert np.abs(block - expected).max() < 1e-13 * np.abs(expected).max()


def test_damped_sum_matches_manual_loop(rng):
    sites = _random_cloud(rng, 8)
    eta = 0.3
    k_par = (0.4, -0.1)
    got = lattice_green_sum(sites, k_par, eta=eta)
    expected = np.zeros((3, 3), dtype=complex)
    for s in sites:
        r = np.linalg.norm(s)
        phase = np.exp(-1j * (k_par[0] * s[0] + k_par[1] * s[1]))
        expected += green_tensor(np.zeros(3), s, K) * phase * np.exp(-eta * r)
    assert np.abs(got - expected).max() < 1e-13 * np.abs(expected).max()


def test_coincidence_guards():
    dup = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    weights = np.ones((2, 3), dtype=complex)
    with pytest.raises(CoincidentPointError):
        apply_interaction(dup, weights)
    with pytest.raises(CoincidentPointError):
        coupling_matrix(dup, np.ones(2, dtype=complex))
    with pytest.raises(CoincidentPointError):
        scattered_field_raw(np.array([[0.1, 0.0, 0.0]]),
                            np.array([[0.1, 0.0, 0.0]]),
                            np.ones((1, 3), dtype=complex))
    with pytest.raises(CoincidentPointError):
        lattice_green_sum(np.array([[0.0, 0.0, 0.0]]))

    # Just above the floor still evaluates (to a huge near-field value)
    near = np.array([[0.0, 0.0, 0.0], [2 * MIN_SEPARATION, 0.0, 0.0]])
    out = apply_interaction(near, weights)
    assert np.all(np.isfinite(out))


def test_input_validation():
    good = np.zeros((2, 3))
    with pytest.raises(ValueError):
        apply_interaction(np.zeros((2, 2)), np.ones((2, 3), dtype=complex))
    with pytest.raises(ValueError):
        apply_interaction(good, np.ones((3, 3), dtype=complex))
    with pytest.raises(ValueError):
        coupling_matrix(good, np.ones(5, dtype=complex))
    with pytest.raises(ValueError):
        lattice_green_sum(np.zeros((2, 3)), backend="fortran")


def test_resolve_threads(monkeypatch):
    assert resolve_threads(4) == 4
    monkeypatch.setenv("COOPDIPOLE_THREADS", "7")
    assert resolve_threads() == 7
    assert resolve_threads(2) == 2  # explicit argument wins
    monkeypatch.setenv("COOPDIPOLE_THREADS", "not a number")
    assert resolve_threads() >= 1
    monkeypatch.delenv("COOPDIPOLE_THREADS")
    assert resolve_threads() >= 1
