"""Peephole LSTM cell.

Gate equations follow the full-matrix peephole form: the input and forget
gates read the previous cell memory, the output gate reads the current one.
Peephole matrices are full state_dim x state_dim, not diagonal.
"""

import numpy as np

from .autodiff import Parameter, add, linsum, mul, sigmoid, tanh

# creation order doubles as checkpoint registry order
FIELDS = ("W_ix", "W_ih", "W_ic", "b_i",
          "W_fx", "W_fh", "W_fc", "b_f",
          "W_cx", "W_ch", "b_c",
          "W_ox", "W_oh", "W_oc", "b_o")


class LstmParams:
    """One direction's gate matrices and biases."""

    def __init__(self, prefix, input_dim, state_dim, init):
        self.prefix = prefix
        self.input_dim = input_dim
        self.state_dim = state_dim
        d_in, d_s = input_dim, state_dim
        shapes = {
            "W_ix": (d_s, d_in), "W_ih": (d_s, d_s), "W_ic": (d_s, d_s), "b_i": (d_s,),
            "W_fx": (d_s, d_in), "W_fh": (d_s, d_s), "W_fc": (d_s, d_s), "b_f": (d_s,),
            "W_cx": (d_s, d_in), "W_ch": (d_s, d_s), "b_c": (d_s,),
            "W_ox": (d_s, d_in), "W_oh": (d_s, d_s), "W_oc": (d_s, d_s), "b_o": (d_s,),
        }
        for name in FIELDS:
            setattr(self, name, Parameter("%s.%s" % (prefix, name), init(shapes[name])))

    def parameters(self):
        return [getattr(self, name) for name in FIELDS]


def lstm_step(tape, p, x_t, h_prev, c_prev):
    """One cell update; returns (h_t, c_t) nodes."""
    i_t = sigmoid(tape, linsum(tape, [(p.W_ix, x_t), (p.W_ih, h_prev),
                                      (p.W_ic, c_prev)], p.b_i))
    f_t = sigmoid(tape, linsum(tape, [(p.W_fx, x_t), (p.W_fh, h_prev),
                                      (p.W_fc, c_prev)], p.b_f))
    z_t = tanh(tape, linsum(tape, [(p.W_cx, x_t), (p.W_ch, h_prev)], p.b_c))
    c_t = add(tape, mul(tape, f_t, c_prev), mul(tape, i_t, z_t))
    o_t = sigmoid(tape, linsum(tape, [(p.W_ox, x_t), (p.W_oh, h_prev),
                                      (p.W_oc, c_t)], p.b_o))
    h_t = mul(tape, o_t, tanh(tape, c_t))
    return h_t, c_t


def lstm_forward(tape, p, xs, h0=None, c0=None):
    """Fold lstm_step over xs left-to-right; returns the list of (h_t, c_t).

    Initial states default to zero vectors (not learned).
    """
    if not xs:
        raise ValueError("lstm_forward: empty input sequence")
    h = h0 if h0 is not None else tape.const(np.zeros(p.state_dim))
    c = c0 if c0 is not None else tape.const(np.zeros(p.state_dim))
    states = []
    for x in xs:
        h, c = lstm_step(tape, p, x, h, c)
        states.append((h, c))
    return states
