"""
Peephole LSTM cell, bidirectional wrapper and window-to-window sequence training.

Per direction, with x_t the input row, m the hidden state and c the cell state:

    i_t = sigmoid(W_ix x_t + W_im m_{t-1} + p_i * c_{t-1} + b_i)
    f_t = sigmoid(W_fx x_t + W_fm m_{t-1} + p_f * c_{t-1} + b_f)
    c_t = f_t * c_{t-1} + i_t * g(W_cx x_t + W_cm m_{t-1} + b_c)
    o_t = sigmoid(W_ox x_t + W_om m_{t-1} + p_o * c_t + b_o)
    m_t = o_t * h(c_t)

and the two directions are joined by y_t = phi(W_ym [m_fwd_t, m_bwd_t] + b_y).

Date: Oct 2026

"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import expit

from pdmtools.exceptions import InsufficientDataError, ParameterError, ShapeError, TrainingDivergedError
from pdmtools.layers import glorot_uniform
from pdmtools.network import ParameterStore
from pdmtools.optimizers import Adam
from pdmtools.pgf_format import read_pgf, write_pgf

logger = logging.getLogger(__name__)

PREFIX = "bilstm"
DIRECTIONS = ("fwd", "bwd")
GATES = ("i", "f", "c", "o")
PEEPHOLES = ("i", "f", "o")

# activation -> (function, derivative expressed through the output)
ACTIVATIONS = {
    "tanh": (np.tanh, lambda y: 1.0 - y * y),
    "sigmoid": (expit, lambda y: y * (1.0 - y)),
    "identity": (lambda a: a, lambda y: np.ones_like(y)),
}


def _activation(name, allowed):
    if name not in allowed:
        raise ParameterError("activation must be one of %s, got %r" % (allowed, name))
    return ACTIVATIONS[name]


@dataclass
class LstmCellParams:
    """
    One direction's weights. Matrices are hidden x input (w_*x) or hidden x hidden (w_*m);
    the peepholes p_* are diagonal, stored as vectors of length hidden.
    """
    w_ix: np.ndarray
    w_fx: np.ndarray
    w_cx: np.ndarray
    w_ox: np.ndarray
    w_im: np.ndarray
    w_fm: np.ndarray
    w_cm: np.ndarray
    w_om: np.ndarray
    p_i: np.ndarray
    p_f: np.ndarray
    p_o: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    @property
    def hidden_size(self):
        return self.w_ix.shape[0]

    @property
    def input_size(self):
        return self.w_ix.shape[1]

    def __post_init__(self):
        h, m = self.w_ix.shape
        for gate in GATES:
            if getattr(self, "w_%sx" % gate).shape != (h, m):
                raise ShapeError("w_%sx must be %dx%d" % (gate, h, m))
            if getattr(self, "w_%sm" % gate).shape != (h, h):
                raise ShapeError("w_%sm must be %dx%d" % (gate, h, h))
            if getattr(self, "b_%s" % gate).shape != (h,):
                raise ShapeError("b_%s must have length %d" % (gate, h))
        for gate in PEEPHOLES:
            if getattr(self, "p_%s" % gate).shape != (h,):
                raise ShapeError("p_%s must have length %d" % (gate, h))

    @staticmethod
    def names():
        return (["w_%sx" % g for g in GATES] + ["w_%sm" % g for g in GATES]
                + ["p_%s" % g for g in PEEPHOLES] + ["b_%s" % g for g in GATES])

    @classmethod
    def from_store(cls, store, prefix):
        return cls(**{name: store[prefix + "." + name] for name in cls.names()})

    @classmethod
    def zeros(cls, input_size, hidden_size):
        arrays = {}
        for name in cls.names():
            if name.endswith("x"):
                arrays[name] = np.zeros((hidden_size, input_size))
            elif name.startswith("w_"):
                arrays[name] = np.zeros((hidden_size, hidden_size))
            else:
                arrays[name] = np.zeros(hidden_size)
        return cls(**arrays)


def _cell_forward(x_t, m_prev, c_prev, cell, g=np.tanh, h=np.tanh):
    i = expit(x_t @ cell.w_ix.T + m_prev @ cell.w_im.T + cell.p_i * c_prev + cell.b_i)
    f = expit(x_t @ cell.w_fx.T + m_prev @ cell.w_fm.T + cell.p_f * c_prev + cell.b_f)
    candidate = g(x_t @ cell.w_cx.T + m_prev @ cell.w_cm.T + cell.b_c)
    c = f * c_prev + i * candidate
    o = expit(x_t @ cell.w_ox.T + m_prev @ cell.w_om.T + cell.p_o * c + cell.b_o)
    hc = h(c)
    return o * hc, c, (x_t, m_prev, c_prev, i, f, candidate, c, o, hc)


def lstm_cell_step(x_t, m_prev, c_prev, params, cell_activation="tanh"):
    """
    One step of the peephole cell. Works on single vectors or on batches of row vectors.

    :param x_t: input, length m (or batch x m)
    :param m_prev: previous hidden state, length hidden
    :param c_prev: previous cell state, length hidden
    :param params: LstmCellParams
    :param cell_activation: g = h, "tanh" (default) or "sigmoid"
    :return: (m_t, c_t)
    """
    x_t, m_prev, c_prev = (np.asarray(a, dtype=np.float64) for a in (x_t, m_prev, c_prev))
    if x_t.shape[-1] != params.input_size:
        raise ShapeError("input has %d features, cell expects %d" % (x_t.shape[-1], params.input_size))
    if m_prev.shape[-1] != params.hidden_size or c_prev.shape != m_prev.shape:
        raise ShapeError("states must have length %d" % params.hidden_size)
    act, _ = _activation(cell_activation, ("tanh", "sigmoid"))
    m_t, c_t, _ = _cell_forward(x_t, m_prev, c_prev, params, act, act)
    return m_t, c_t


def _scan(x, cell, act):
    """
    Run a cell over (batch, steps, m) from step 0 to the last step.

    :return: (hidden states (batch, steps, hidden), per-step caches)
    """
    batch, steps, _ = x.shape
    m = np.zeros((batch, cell.hidden_size))
    c = np.zeros((batch, cell.hidden_size))
    states = np.empty((batch, steps, cell.hidden_size))
    caches = []
    for t in range(steps):
        m, c, cache = _cell_forward(x[:, t], m, c, cell, act, act)
        states[:, t] = m
        caches.append(cache)
    return states, caches


def _scan_backward(d_states, caches, cell, act_grad):
    """
    Backpropagation through time for one direction.

    :return: (gradient w.r.t. the inputs (batch, steps, m), dict local name -> gradient)
    """
    grads = {name: np.zeros_like(getattr(cell, name)) for name in LstmCellParams.names()}
    batch, steps, _ = d_states.shape
    dx = np.empty((batch, steps, cell.input_size))
    dm_next = np.zeros((batch, cell.hidden_size))
    dc_next = np.zeros((batch, cell.hidden_size))

    for t in reversed(range(steps)):
        x_t, m_prev, c_prev, i, f, candidate, c, o, hc = caches[t]
        dm = d_states[:, t] + dm_next

        da_o = dm * hc * o * (1.0 - o)
        dc = dc_next + dm * o * act_grad(hc) + da_o * cell.p_o
        da_c = dc * i * act_grad(candidate)
        da_i = dc * candidate * i * (1.0 - i)
        da_f = dc * c_prev * f * (1.0 - f)

        pre = {"i": da_i, "f": da_f, "c": da_c, "o": da_o}
        for gate, da in pre.items():
            grads["w_%sx" % gate] += da.T @ x_t
            grads["w_%sm" % gate] += da.T @ m_prev
            grads["b_%s" % gate] += da.sum(axis=0)
        grads["p_i"] += (da_i * c_prev).sum(axis=0)
        grads["p_f"] += (da_f * c_prev).sum(axis=0)
        grads["p_o"] += (da_o * c).sum(axis=0)

        dx[:, t] = sum(da @ getattr(cell, "w_%sx" % gate) for gate, da in pre.items())
        dm_next = sum(da @ getattr(cell, "w_%sm" % gate) for gate, da in pre.items())
        dc_next = dc * f + da_i * cell.p_i + da_f * cell.p_f
    return dx, grads


class BiLstmModel:
    """
    Forward and backward peephole cells joined by an output projection.

    :param store: ParameterStore holding bilstm.fwd.*, bilstm.bwd.*, bilstm.proj.w and bilstm.proj.b
    :param cell_activation: g = h for both cells
    :param output_activation: phi, "identity" (default) or "tanh"
    """

    def __init__(self, store, cell_activation="tanh", output_activation="identity"):
        self.params = store
        self.cell_activation = cell_activation
        self.output_activation = output_activation
        self._act, self._act_grad = _activation(cell_activation, ("tanh", "sigmoid"))
        self._phi, self._phi_grad = _activation(output_activation, ("identity", "tanh"))

        fwd, bwd = self.cell("fwd"), self.cell("bwd")
        if (fwd.hidden_size, fwd.input_size) != (bwd.hidden_size, bwd.input_size):
            raise ShapeError("forward and backward cells differ in size")
        if store[PREFIX + ".proj.w"].shape != (fwd.input_size, 2 * fwd.hidden_size):
            raise ShapeError("projection must be %dx%d" % (fwd.input_size, 2 * fwd.hidden_size))
        if store[PREFIX + ".proj.b"].shape != (fwd.input_size,):
            raise ShapeError("projection bias must have length %d" % fwd.input_size)
        self.hidden_size = fwd.hidden_size
        self.num_features = fwd.input_size
        self.history = None

    @classmethod
    def initialise(cls, num_features=4, hidden_size=64, seed=0, cell_activation="tanh",
                   output_activation="identity"):
        """
        Glorot-uniform matrices, zero peepholes and biases, forget bias 1.
        """
        if hidden_size < 1:
            raise ParameterError("hidden size must be at least 1")
        rng = np.random.default_rng(seed)
        store = ParameterStore(seed)
        for direction in DIRECTIONS:
            cell = LstmCellParams.zeros(num_features, hidden_size)
            for name in LstmCellParams.names():
                value = getattr(cell, name)
                if name.startswith("w_"):
                    value = glorot_uniform(rng, value.shape, value.shape[1], value.shape[0])
                elif name == "b_f":
                    value = np.ones(hidden_size)
                store.add("%s.%s.%s" % (PREFIX, direction, name), value)
        store.add(PREFIX + ".proj.w", glorot_uniform(rng, (num_features, 2 * hidden_size),
                                                      2 * hidden_size, num_features))
        store.add(PREFIX + ".proj.b", np.zeros(num_features))
        return cls(store, cell_activation, output_activation)

    @classmethod
    def zeros(cls, num_features=4, hidden_size=64, **kwargs):
        store = ParameterStore()
        for direction in DIRECTIONS:
            cell = LstmCellParams.zeros(num_features, hidden_size)
            for name in LstmCellParams.names():
                store.add("%s.%s.%s" % (PREFIX, direction, name), getattr(cell, name))
        store.add(PREFIX + ".proj.w", np.zeros((num_features, 2 * hidden_size)))
        store.add(PREFIX + ".proj.b", np.zeros(num_features))
        return cls(store, **kwargs)

    def cell(self, direction):
        return LstmCellParams.from_store(self.params, "%s.%s" % (PREFIX, direction))

    def _batch(self, windows):
        x = np.asarray(windows, dtype=np.float64)
        single = x.ndim == 2
        if single:
            x = x[None]
        if x.ndim != 3 or x.shape[2] != self.num_features:
            raise ShapeError("windows must be n x %d, got %s" % (self.num_features, np.shape(windows)))
        return x, single

    def hidden_sequence(self, windows):
        """
        Concatenated forward and backward hidden states, before the projection.

        :return: (steps, 2 * hidden) for one window, (batch, steps, 2 * hidden) for a batch
        """
        x, single = self._batch(windows)
        states, _ = self._hidden(x)
        return states[0] if single else states

    def _hidden(self, x):
        fwd_states, fwd_caches = _scan(x, self.cell("fwd"), self._act)
        bwd_states, bwd_caches = _scan(x[:, ::-1], self.cell("bwd"), self._act)
        states = np.concatenate([fwd_states, bwd_states[:, ::-1]], axis=2)
        return states, (fwd_caches, bwd_caches)

    def forward(self, windows):
        """
        :param windows: n x m window or batch x n x m
        :return: prediction for the next window, same shape
        """
        x, single = self._batch(windows)
        states, _ = self._hidden(x)
        y = self._phi(states @ self.params[PREFIX + ".proj.w"].T + self.params[PREFIX + ".proj.b"])
        return y[0] if single else y

    def loss_and_gradients(self, inputs, targets):
        """
        Mean squared error over every output entry, with exact gradients.

        :return: (loss, dict parameter name -> gradient, gradient w.r.t. inputs)
        """
        x, _ = self._batch(inputs)
        targets = np.asarray(targets, dtype=np.float64).reshape(x.shape)
        w_y = self.params[PREFIX + ".proj.w"]
        states, (fwd_caches, bwd_caches) = self._hidden(x)
        y = self._phi(states @ w_y.T + self.params[PREFIX + ".proj.b"])

        diff = y - targets
        loss = float(np.mean(diff ** 2))
        d_pre = 2.0 * diff / diff.size * self._phi_grad(y)

        grads = {PREFIX + ".proj.w": np.einsum("btm,bth->mh", d_pre, states),
                 PREFIX + ".proj.b": d_pre.sum(axis=(0, 1))}
        d_states = d_pre @ w_y
        h = self.hidden_size
        dx_fwd, fwd_grads = _scan_backward(d_states[:, :, :h], fwd_caches, self.cell("fwd"), self._act_grad)
        dx_bwd, bwd_grads = _scan_backward(d_states[:, ::-1, h:], bwd_caches, self.cell("bwd"), self._act_grad)
        for direction, local in (("fwd", fwd_grads), ("bwd", bwd_grads)):
            for name, g in local.items():
                grads["%s.%s.%s" % (PREFIX, direction, name)] = g
        return loss, grads, dx_fwd + dx_bwd[:, ::-1]


def bilstm_forward(window, model):
    """
    Predict the next window from the current one.

    :param window: n x m matrix in generator scale
    :param model: BiLstmModel
    :return: n x m matrix, row t the prediction for step t of the next window
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2:
        raise ShapeError("expected a single n x m window, got shape %s" % (window.shape,))
    return model.forward(window)


@dataclass(frozen=True)
class SeqTrainConfig:
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    hidden_size: int = 64
    cell_activation: str = "tanh"
    output_activation: str = "identity"
    log_every: int = 100

    def __post_init__(self):
        if self.epochs < 0:
            raise ParameterError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ParameterError("batch size must be positive")
        if self.hidden_size < 1:
            raise ParameterError("hidden size must be at least 1")


def _pair_arrays(pairs):
    if isinstance(pairs, tuple) and len(pairs) == 2 and np.ndim(pairs[0]) == 3:
        inputs, targets = pairs
    elif len(pairs) == 0:
        raise InsufficientDataError("no training pairs")
    else:
        inputs = np.stack([np.asarray(p[0], dtype=np.float64) for p in pairs])
        targets = np.stack([np.asarray(p[1], dtype=np.float64) for p in pairs])
    inputs, targets = np.asarray(inputs, dtype=np.float64), np.asarray(targets, dtype=np.float64)
    if len(inputs) == 0:
        raise InsufficientDataError("no training pairs")
    if inputs.shape != targets.shape or inputs.ndim != 3:
        raise ShapeError("inputs %s and targets %s must be matching (count, n, m) arrays"
                         % (inputs.shape, targets.shape))
    return inputs, targets


def bilstm_train(pairs, config, model=None):
    """
    Minimise the mean squared error between predicted and actual next windows with Adam. One epoch
    is a shuffled pass over all pairs in mini-batches. The per-epoch loss history is attached to
    the returned model as `history` (DataFrame epoch, loss).

    :param pairs: list of (input window, target window), or the (inputs, targets) arrays returned by
                  chunk.make_training_pairs
    :param config: SeqTrainConfig
    :param model: optional BiLstmModel to continue training
    :return: BiLstmModel
    """
    inputs, targets = _pair_arrays(pairs)
    if model is None:
        model = BiLstmModel.initialise(inputs.shape[2], config.hidden_size, config.seed,
                                       config.cell_activation, config.output_activation)
    optimizer = Adam(lr=config.lr, beta1=config.beta1, beta2=config.beta2)
    rng = np.random.default_rng([config.seed, 3])
    logger.info("training bilstm: %d pairs, %d epochs, hidden size %d", len(inputs), config.epochs,
                model.hidden_size)

    rows = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(inputs))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grads, _ = model.loss_and_gradients(inputs[batch], targets[batch])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            optimizer.step(model.params, grads)
            total += loss * len(batch)
        epoch_loss = total / len(inputs)
        rows.append((epoch, epoch_loss))
        if epoch % config.log_every == 0:
            logger.info("bilstm epoch %d: loss %.6f", epoch, epoch_loss)

    model.history = pd.DataFrame(rows, columns=["epoch", "loss"]).astype({"epoch": int})
    return model


def save_bilstm(model, file):
    write_pgf(model.params, file)


def load_bilstm(file, cell_activation="tanh", output_activation="identity"):
    return BiLstmModel(read_pgf(file).subset(PREFIX), cell_activation, output_activation)
