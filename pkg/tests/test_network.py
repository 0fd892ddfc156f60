import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from rbmreweight.network import (LayeredNetwork, NetworkParams, ShapeError, SpinConfig,
                                 all_configs, combine_params, config_index, dumps_params,
                                 layered_energy, loads_params, promote_to_layered, rbm_energy,
                                 split_params)
from rbmreweight.states import bell_complex, ghz

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def complex_params(draw, max_n=4, max_m=4):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    re = draw(arrays(float, (n * m + n + m,), elements=finite))
    im = draw(arrays(float, (n * m + n + m,), elements=finite))
    z = re + 1j * im
    return NetworkParams(z[:n * m].reshape(n, m), z[n * m:n * m + n], z[n * m + n:])


def spins(draw, n):
    return np.array(draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n)))


def test_energy_zero_params():
    p = NetworkParams.zeros(3, 2)
    assert rbm_energy(SpinConfig.rbm([1, -1, 1], [1, 1]), p) == 0


def test_energy_single_term():
    p = NetworkParams([[1.0]], [0.0], [0.0])
    assert rbm_energy(SpinConfig.rbm([1], [1]), p) == -1


def test_energy_bell_complex():
    p = bell_complex()
    W, d, b = p.weights, p.visible_bias, p.hidden_bias
    expected = -(W[0, 0] - W[1, 0] + d[0] - d[1] + b[0])
    assert rbm_energy(SpinConfig.rbm([1, -1], [1]), p) == pytest.approx(expected, abs=1e-15)


def test_energy_shape_error():
    with pytest.raises(ShapeError):
        rbm_energy(SpinConfig.rbm([1, 1, 1], [1]), NetworkParams.zeros(2, 1))


def test_params_validation():
    with pytest.raises(ShapeError):
        NetworkParams(np.zeros((2, 3)), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        NetworkParams([[np.nan]], [0], [0])
    with pytest.raises(ValueError):
        NetworkParams([[0]], [np.inf], [0])


def test_params_immutable():
    p = ghz(3)
    with pytest.raises(ValueError):
        p.weights[0, 0] = 1.0


def test_split_real_and_imaginary():
    real = NetworkParams([[0.3, -0.2]], [0.1], [0.5, 0.0])
    r, i = split_params(real)
    assert r == real and i == NetworkParams.zeros(1, 2)
    imag = real.scale(1j)
    r, i = split_params(imag)
    assert r == NetworkParams.zeros(1, 2) and i == real


def test_split_bell_complex():
    r, i = split_params(bell_complex())
    assert r.weights[0, 0].real == pytest.approx(-0.5 * np.log(np.sqrt(2)), abs=1e-15)
    assert r.weights[0, 0].real == pytest.approx(-0.173287, abs=1e-6)
    assert i.weights[0, 0].real == pytest.approx(np.pi / 2, abs=1e-15)


@given(complex_params())
def test_split_roundtrip_exact(p):
    r, i = split_params(p)
    back = combine_params(r, i)
    assert np.array_equal(back.weights, p.weights)
    assert np.array_equal(back.visible_bias, p.visible_bias)
    assert np.array_equal(back.hidden_bias, p.hidden_bias)


@given(complex_params(), st.data())
def test_energy_linear_in_weight(p, data):
    v = spins(data.draw, p.n_visible)
    h = spins(data.draw, p.n_hidden)
    i = data.draw(st.integers(0, p.n_visible - 1))
    j = data.draw(st.integers(0, p.n_hidden - 1))
    w = np.array(p.weights)
    w[i, j] *= 2
    q = NetworkParams(w, p.visible_bias, p.hidden_bias)
    cfg = SpinConfig.rbm(v, h)
    delta = rbm_energy(cfg, q) - rbm_energy(cfg, p)
    assert delta == pytest.approx(-v[i] * p.weights[i, j] * h[j], abs=1e-12)


@given(complex_params(), st.data())
def test_energy_conjugation(p, data):
    cfg = SpinConfig.rbm(spins(data.draw, p.n_visible), spins(data.draw, p.n_hidden))
    assert rbm_energy(cfg, p.conj()) == pytest.approx(np.conj(rbm_energy(cfg, p)), abs=1e-12)


@pytest.mark.parametrize("params, layers", [(bell_complex(), (2, 1)), (ghz(3), (3, 2)),
                                             (NetworkParams.zeros(10, 10), (10, 10))])
def test_promote_to_layered(params, layers):
    net = promote_to_layered(params)
    assert net.layers == layers
    assert net.duplicated == frozenset({1})
    assert net.axes == "Z" * params.n_visible


def test_layered_energy_matches_rbm():
    p = bell_complex()
    net = promote_to_layered(p)
    cfg = SpinConfig.rbm([1, -1], [-1], [1])
    assert layered_energy(cfg, net) == pytest.approx(rbm_energy(cfg, p), abs=1e-15)


def test_layered_network_rules():
    with pytest.raises(ValueError):
        LayeredNetwork((2, 1), (np.zeros((2, 1)),), (np.zeros(2), np.zeros(1)), frozenset({0}))
    with pytest.raises(ShapeError):
        LayeredNetwork((2, 1), (np.zeros((2, 2)),), (np.zeros(2), np.zeros(1)), frozenset({1}))


def test_spin_values_checked():
    with pytest.raises(ValueError):
        SpinConfig.rbm([1, 0], [1])


@given(complex_params())
@settings(max_examples=30)
def test_text_roundtrip(p):
    assert loads_params(dumps_params(p)) == p


def test_text_errors_carry_line():
    text = dumps_params(ghz(3)).splitlines()
    text[3] = "0 1 oops 0"
    with pytest.raises(ValueError, match="line 4"):
        loads_params("\n".join(text))
    with pytest.raises(ValueError, match="missing"):
        loads_params("\n".join(dumps_params(ghz(3)).splitlines()[:-1]))


def test_basis_order():
    c = all_configs(2)
    assert c.tolist() == [[1, 1], [1, -1], [-1, 1], [-1, -1]]
    assert config_index(c).tolist() == [0, 1, 2, 3]
