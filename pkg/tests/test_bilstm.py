import math

import numpy as np
import pandas as pd
import pytest

from pdmtools.bilstm import (BiLstmModel, LstmCellParams, SeqTrainConfig, bilstm_forward, bilstm_train,
                             load_bilstm, lstm_cell_step, save_bilstm)
from pdmtools.exceptions import InsufficientDataError, ShapeError


def random_cell(rng, input_size=4, hidden_size=3, scale=1.0):
    zeros = LstmCellParams.zeros(input_size, hidden_size)
    return LstmCellParams(**{name: rng.uniform(-scale, scale, getattr(zeros, name).shape)
                             for name in LstmCellParams.names()})


def scalar_cell(x, m_prev, c_prev, p):
    """Straight-line evaluation of the peephole cell, one hidden unit at a time."""
    hidden, inputs = p.w_ix.shape
    c_new, m_new = [], []
    for k in range(hidden):
        def pre(gate):
            s = getattr(p, "b_" + gate)[k]
            for j in range(inputs):
                s += getattr(p, "w_%sx" % gate)[k, j] * x[j]
            for j in range(hidden):
                s += getattr(p, "w_%sm" % gate)[k, j] * m_prev[j]
            return s
        i = 1.0 / (1.0 + math.exp(-(pre("i") + p.p_i[k] * c_prev[k])))
        f = 1.0 / (1.0 + math.exp(-(pre("f") + p.p_f[k] * c_prev[k])))
        c = f * c_prev[k] + i * math.tanh(pre("c"))
        o = 1.0 / (1.0 + math.exp(-(pre("o") + p.p_o[k] * c)))
        c_new.append(c)
        m_new.append(o * math.tanh(c))
    return np.array(m_new), np.array(c_new)


def test_zero_cell():
    params = LstmCellParams.zeros(4, 3)
    m, c = lstm_cell_step(np.array([0.3, -2.0, 1.0, 5.0]), np.zeros(3), np.zeros(3), params)
    np.testing.assert_array_equal(m, 0.0)
    np.testing.assert_array_equal(c, 0.0)

    m, c = lstm_cell_step(np.ones(4), np.zeros(3), np.ones(3), params)
    np.testing.assert_allclose(c, 0.5, atol=1e-15)
    np.testing.assert_allclose(m, 0.5 * math.tanh(0.5), atol=1e-15)
    assert m[0] == pytest.approx(0.231059, abs=1e-6)


def test_cell_matches_scalar_reference(rng):
    for _ in range(1000):
        params = random_cell(rng)
        x, m_prev, c_prev = rng.normal(size=4), rng.uniform(-1, 1, 3), rng.normal(size=3)
        m, c = lstm_cell_step(x, m_prev, c_prev, params)
        m_ref, c_ref = scalar_cell(x, m_prev, c_prev, params)
        np.testing.assert_allclose(m, m_ref, rtol=0, atol=1e-12)
        np.testing.assert_allclose(c, c_ref, rtol=0, atol=1e-12)


def test_cell_state_stays_bounded(rng):
    for _ in range(20):
        params = random_cell(rng, scale=2.0)
        m, c = np.zeros(3), np.zeros(3)
        for _ in range(50):
            m_next, c_next = lstm_cell_step(rng.normal(size=4), m, c, params)
            assert np.all(np.abs(c_next) <= np.abs(c) + 1.0)
            assert np.all(np.abs(m_next) <= 1.0)
            m, c = m_next, c_next


def test_cell_shape_mismatch():
    with pytest.raises(ShapeError):
        lstm_cell_step(np.ones(3), np.zeros(3), np.zeros(3), LstmCellParams.zeros(4, 3))
    with pytest.raises(ShapeError):
        LstmCellParams(**dict(vars(LstmCellParams.zeros(4, 3)), p_i=np.zeros(2)))


def test_zero_model_predicts_zeros(rng):
    model = BiLstmModel.zeros(4, 5)
    out = bilstm_forward(rng.normal(size=(9, 4)), model)
    assert out.shape == (9, 4)
    np.testing.assert_array_equal(out, 0.0)


def test_reference_output_shape(rng):
    model = BiLstmModel.initialise(4, 64, seed=0)
    assert bilstm_forward(rng.uniform(-1, 1, (9, 4)), model).shape == (9, 4)
    with pytest.raises(ShapeError):
        bilstm_forward(rng.uniform(-1, 1, (2, 9, 4)), model)


def test_hand_traced_two_directions():
    model = BiLstmModel.zeros(1, 1)
    model.params["bilstm.fwd.w_cx"][...] = 1.0
    model.params["bilstm.bwd.w_cx"][...] = 2.0
    model.params["bilstm.proj.w"][...] = [[1.0, -1.0]]
    model.params["bilstm.proj.b"][...] = 0.25
    window = np.array([[0.5], [-1.0]])

    # all gates sit at 0.5 with zero gate weights
    c_f0 = 0.5 * math.tanh(0.5)
    c_f1 = 0.5 * c_f0 + 0.5 * math.tanh(-1.0)
    c_b1 = 0.5 * math.tanh(-2.0)
    c_b0 = 0.5 * c_b1 + 0.5 * math.tanh(1.0)
    expected = [0.5 * math.tanh(c_f0) - 0.5 * math.tanh(c_b0) + 0.25,
                0.5 * math.tanh(c_f1) - 0.5 * math.tanh(c_b1) + 0.25]
    np.testing.assert_allclose(bilstm_forward(window, model)[:, 0], expected, atol=1e-15)


def test_reversing_input_and_cells_reverses_hidden_sequence(rng):
    model = BiLstmModel.initialise(4, 3, seed=2)
    swapped = model.params.copy()
    for name in model.params:
        if ".fwd." in name:
            other = name.replace(".fwd.", ".bwd.")
            swapped[name][...] = model.params[other]
            swapped[other][...] = model.params[name]
    mirror = BiLstmModel(swapped)

    window = rng.uniform(-1, 1, (9, 4))
    hidden = model.hidden_sequence(window)
    mirrored = mirror.hidden_sequence(window[::-1])[::-1]
    np.testing.assert_allclose(mirrored[:, :3], hidden[:, 3:], atol=1e-14)
    np.testing.assert_allclose(mirrored[:, 3:], hidden[:, :3], atol=1e-14)


def test_zero_epochs_keeps_initialisation(rng):
    pairs = [(rng.uniform(-1, 1, (9, 4)), rng.uniform(-1, 1, (9, 4))) for _ in range(3)]
    config = SeqTrainConfig(epochs=0, hidden_size=4, seed=7)
    model = bilstm_train(pairs, config)
    fresh = BiLstmModel.initialise(4, 4, seed=7)
    for name in fresh.params:
        np.testing.assert_array_equal(model.params[name], fresh.params[name])
    assert len(model.history) == 0


def test_training_is_reproducible(rng):
    inputs = rng.uniform(-1, 1, (6, 9, 4))
    targets = rng.uniform(-1, 1, (6, 9, 4))
    config = SeqTrainConfig(epochs=4, batch_size=4, hidden_size=4, seed=1)
    a = bilstm_train((inputs, targets), config)
    b = bilstm_train((inputs, targets), config)
    pd.testing.assert_frame_equal(a.history, b.history)
    assert a.history["epoch"].tolist() == [1, 2, 3, 4]


def test_training_lowers_the_loss(rng):
    inputs = rng.uniform(-1, 1, (8, 9, 4))
    config = SeqTrainConfig(epochs=60, batch_size=8, hidden_size=6, lr=1e-2, seed=0)
    model = bilstm_train((inputs, inputs.copy()), config)
    assert model.history["loss"].iloc[-1] < model.history["loss"].iloc[0]


def test_empty_pairs():
    with pytest.raises(InsufficientDataError):
        bilstm_train([], SeqTrainConfig(epochs=1))


def test_weights_file_round_trip(tmp_path, rng):
    model = BiLstmModel.initialise(4, 5, seed=3)
    path = str(tmp_path / "bilstm.pgf")
    save_bilstm(model, path)
    loaded = load_bilstm(path)
    window = rng.uniform(-1, 1, (9, 4))
    np.testing.assert_allclose(bilstm_forward(window, loaded), bilstm_forward(window, model), atol=1e-5)


def test_tanh_output_activation_bounds(rng):
    model = BiLstmModel.initialise(4, 3, seed=0, output_activation="tanh")
    out = model.forward(rng.normal(size=(9, 4)) * 10)
    assert np.all(np.abs(out) < 1.0)


@pytest.mark.slow
def test_identity_task_is_learned(rng):
    inputs = rng.uniform(-1, 1, (10, 9, 4))
    config = SeqTrainConfig(epochs=2000, batch_size=10, hidden_size=16, lr=1e-2, seed=0, log_every=500)
    model = bilstm_train((inputs, inputs.copy()), config)
    assert model.history["loss"].iloc[-1] < 1e-2
