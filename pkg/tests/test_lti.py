"""Model simulation and response evaluation against independent oracles."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pencilid import (
    DescriptorModel,
    DimensionError,
    FormatError,
    MarkovSequence,
    SignalSequence,
    SingularE,
    descriptor_to_standard,
    discretize_zoh,
    frequency_response,
    impulse_response,
    is_stable,
    load_markov,
    load_model,
    save_markov,
    save_model,
    simulate,
)
from conftest import random_stable_model


def _hand_simulate(A, B, C, D, u):
    """Reference loop: x_{k+1} = A x_k + B u_k, y_k = C x_k + D u_k."""
    n = A.shape[0]
    x = np.zeros(n)
    ys = []
    for uk in u:
        ys.append(C @ x + D @ uk)
        x = A @ x + B @ uk
    return np.asarray(ys)


def test_simulate_matches_reference_loop():
    rng = np.random.default_rng(7)
    model = random_stable_model(rng, 4, nu=2, ny=3, with_d=True)
    u = rng.normal(size=(40, 2))
    y = simulate(model, SignalSequence(u, ts=1.0))
    y_ref = _hand_simulate(model.A, model.B, model.C, model.D, u)
    assert np.allclose(y.samples, y_ref, atol=1e-12)


def test_impulse_response_formula():
    rng = np.random.default_rng(3)
    model = random_stable_model(rng, 5, nu=2, ny=2, with_d=True)
    h = impulse_response(model, 12)
    assert np.allclose(h.blocks[0], model.D)
    Ak = np.eye(5)
    for k in range(1, 12):
        assert np.allclose(h.blocks[k], model.C @ Ak @ model.B, atol=1e-12)
        Ak = model.A @ Ak


def test_frequency_response_formula():
    rng = np.random.default_rng(11)
    model = random_stable_model(rng, 4, with_d=True)
    z = np.exp(1j * np.linspace(0.1, 3.0, 7))
    H = frequency_response(model, z)
    for k, zk in enumerate(z):
        ref = model.C @ np.linalg.solve(
            zk * np.eye(4) - model.A, model.B
        ) + model.D
        assert np.allclose(H[k], ref, atol=1e-12)


def test_discretize_zoh_matches_scipy():
    import scipy.signal

    rng = np.random.default_rng(5)
    A = rng.normal(size=(3, 3)) - 2.0 * np.eye(3)
    B = rng.normal(size=(3, 1))
    C = rng.normal(size=(1, 3))
    D = np.zeros((1, 1))
    ct = DescriptorModel(A=A, B=B, C=C, D=D, ts="continuous")
    dt = discretize_zoh(ct, 0.1)
    Ad, Bd, Cd, Dd, _ = scipy.signal.cont2discrete((A, B, C, D), 0.1, "zoh")
    assert np.allclose(dt.A, Ad, atol=1e-12)
    assert np.allclose(dt.B, Bd, atol=1e-12)
    assert dt.ts == 0.1


def test_is_stable():
    stable = DescriptorModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], ts=1.0)
    unstable = DescriptorModel(A=[[1.5]], B=[[1.0]], C=[[1.0]], ts=1.0)
    ok, radius = is_stable(stable)
    assert ok and radius == pytest.approx(0.5)
    ok, radius = is_stable(unstable)
    assert not ok and radius == pytest.approx(1.5)


def test_singular_e_rejected():
    model = DescriptorModel(
        A=[[0.5, 0], [0, 0.5]], B=[[1.0], [1.0]], C=[[1.0, 0.0]],
        E=[[1.0, 0.0], [0.0, 0.0]], ts=1.0,
    )
    with pytest.raises(SingularE):
        impulse_response(model, 5)


# --- invariants (randomized, >= 100 cases each) ----------------------------

@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6),
       N=st.integers(2, 20))
def test_simulate_impulse_equivalence(seed, n, N):
    rng = np.random.default_rng(seed)
    model = random_stable_model(rng, n, with_d=True)
    pulse = np.zeros((N, 1))
    pulse[0, 0] = 1.0
    y = simulate(model, SignalSequence(pulse, ts=1.0))
    h = impulse_response(model, N)
    scale = max(np.abs(h.blocks).max(), 1.0)
    assert np.allclose(y.samples[:, 0], h.blocks[:, 0, 0],
                       atol=1e-12 * scale)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6),
       theta=st.floats(0.01, 3.1))
def test_conjugate_symmetry(seed, n, theta):
    rng = np.random.default_rng(seed)
    model = random_stable_model(rng, n, nu=2, ny=2, with_d=True)
    z = np.exp(1j * theta)
    H = frequency_response(model, [z, np.conj(z)])
    assert np.allclose(H[1], np.conj(H[0]), atol=1e-12 * max(1, np.abs(H[0]).max()))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
def test_descriptor_to_standard_preserves_impulse(seed, n):
    rng = np.random.default_rng(seed)
    model = random_stable_model(rng, n, with_d=True)
    # Well-conditioned random E (cond <= 1e6 by construction).
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    scales = np.exp(rng.uniform(-2, 2, size=n))
    E = Q @ np.diag(scales) @ Q.T
    desc = DescriptorModel(A=E @ model.A, B=E @ model.B, C=model.C,
                           D=model.D, E=E, ts=1.0)
    std = descriptor_to_standard(desc)
    assert std.E is None
    h1 = impulse_response(desc, 10).blocks
    h2 = impulse_response(std, 10).blocks
    scale = max(np.abs(h1).max(), 1e-30)
    assert np.allclose(h1, h2, atol=1e-10 * scale)


# --- persistence ------------------------------------------------------------

def test_model_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    model = random_stable_model(rng, 4, nu=2, ny=3, with_d=True)
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    for attr in ("A", "B", "C", "D"):
        assert np.array_equal(getattr(model, attr), getattr(back, attr))
    assert back.ts == model.ts


def test_model_roundtrip_complex(tmp_path):
    model = DescriptorModel(
        A=np.array([[0.5 + 0.1j]]), B=np.array([[1.0 - 2.0j]]),
        C=np.array([[1.0j]]), E=np.array([[2.0 + 0.0j]]), ts=0.5,
    )
    path = tmp_path / "c.json"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(back.A, model.A)
    assert np.array_equal(back.E, model.E)


def test_load_model_format_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(FormatError):
        load_model(path)
    path.write_text(json.dumps({"A": [[0.5]], "B": [[1.0]]}))
    with pytest.raises(FormatError):
        load_model(path)
    path.write_text(json.dumps(
        {"A": [[0.5]], "B": [[1.0]], "C": [[1.0]], "n": 7}))
    with pytest.raises(FormatError):
        load_model(path)


def test_markov_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    h = MarkovSequence(rng.normal(size=(9, 2, 3)), ts=0.25)
    path = tmp_path / "h.csv"
    save_markov(h, path)
    back = load_markov(path)
    assert np.array_equal(back.blocks, h.blocks)
    assert back.ts == 0.25


def test_dimension_errors():
    with pytest.raises(DimensionError):
        DescriptorModel(A=[[0.5, 0.1]], B=[[1.0]], C=[[1.0]], ts=1.0)
