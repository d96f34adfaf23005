"""Tape-based reverse-mode differentiation over numpy float64 arrays.

The graph is recorded eagerly: every op appends a node to the active Tape
and attaches a closure that pushes gradients to its operands.  backward()
walks the tape once in reverse, keeping per-call gradient buffers, so
repeated backward calls accumulate into Parameter.grad additively.
"""

import numpy as np


class DimensionError(ValueError):
    pass


class Parameter:
    """Trainable tensor with gradient and momentum buffers."""

    __slots__ = ("name", "value", "grad", "velocity")

    def __init__(self, name, value):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.velocity = np.zeros_like(self.value)

    @property
    def size(self):
        return self.value.size

    def __repr__(self):
        return "Parameter(%r, shape=%s)" % (self.name, self.value.shape)


class Node:
    __slots__ = ("value", "idx", "backward_fn")

    def __init__(self, value):
        self.value = value
        self.idx = -1
        self.backward_fn = None


class Tape:
    """Ordered record of executed ops for one forward computation.

    With record=False the same op functions run forward-only (no closures),
    which keeps evaluation and gradient-check perturbation passes cheap and
    bit-identical to the recorded path.
    """

    def __init__(self, record=True):
        self.nodes = []
        self.record = record
        self._param_nodes = {}

    def node(self, value):
        n = Node(np.asarray(value, dtype=np.float64))
        n.idx = len(self.nodes)
        self.nodes.append(n)
        return n

    def param(self, p):
        # one leaf per Parameter per tape, so reuse shares gradient flow
        n = self._param_nodes.get(id(p))
        if n is None:
            n = self.node(p.value)
            if self.record:
                def bwd(gbuf, g, p=p):
                    p.grad += g
                n.backward_fn = bwd
            self._param_nodes[id(p)] = n
        return n

    def const(self, value):
        return self.node(value)

    def lift(self, x):
        if isinstance(x, Node):
            return x
        if isinstance(x, Parameter):
            return self.param(x)
        return self.const(x)


def _acc(gbuf, node, delta):
    cur = gbuf[node.idx]
    if cur is None:
        gbuf[node.idx] = np.array(delta, dtype=np.float64)
    else:
        cur += delta


def backward(tape, loss, seed=1.0):
    """Accumulate seed * d(loss)/d(param) into every reachable Parameter's
    grad. Training loops pass seed = 1/num_predictions so the step size is
    independent of batch size."""
    if loss.value.shape != ():
        raise DimensionError("backward: loss must be scalar, got shape %s"
                             % (loss.value.shape,))
    gbuf = [None] * len(tape.nodes)
    gbuf[loss.idx] = np.array(float(seed))
    for n in reversed(tape.nodes):
        g = gbuf[n.idx]
        if g is not None and n.backward_fn is not None:
            n.backward_fn(gbuf, g)


# ---------------------------------------------------------------------------
# primitive ops

def linsum(tape, terms, b=None):
    """sum_i W_i @ x_i (+ b), fused into a single node."""
    terms = [(tape.lift(W), tape.lift(x)) for W, x in terms]
    b = tape.lift(b) if b is not None else None
    acc = None
    for W, x in terms:
        if W.value.ndim != 2 or x.value.ndim != 1 or W.value.shape[1] != x.value.shape[0]:
            raise DimensionError("linsum: matrix %s incompatible with vector %s"
                                 % (W.value.shape, x.value.shape))
        y = W.value @ x.value
        acc = y if acc is None else acc + y
    if b is not None:
        if acc is not None and b.value.shape != acc.shape:
            raise DimensionError("linsum: bias %s incompatible with output %s"
                                 % (b.value.shape, acc.shape))
        acc = b.value.copy() if acc is None else acc + b.value
    out = tape.node(acc)
    if tape.record:
        def bwd(gbuf, g):
            for W, x in terms:
                _acc(gbuf, W, np.outer(g, x.value))
                _acc(gbuf, x, W.value.T @ g)
            if b is not None:
                _acc(gbuf, b, g)
        out.backward_fn = bwd
    return out


def affine(tape, W, x, b):
    """W @ x + b for a single matrix term, with shape validation."""
    Wv = W.value if isinstance(W, (Node, Parameter)) else np.asarray(W)
    xv = x.value if isinstance(x, (Node, Parameter)) else np.asarray(x)
    bv = b.value if isinstance(b, (Node, Parameter)) else np.asarray(b)
    if Wv.ndim != 2:
        raise DimensionError("affine: W must be a matrix, got shape %s" % (Wv.shape,))
    if xv.shape != (Wv.shape[1],):
        raise DimensionError("affine: x has shape %s, expected (%d,)"
                             % (xv.shape, Wv.shape[1]))
    if bv.shape != (Wv.shape[0],):
        raise DimensionError("affine: b has shape %s, expected (%d,)"
                             % (bv.shape, Wv.shape[0]))
    return linsum(tape, [(W, x)], b)


def sigmoid(tape, x):
    x = tape.lift(x)
    y = 1.0 / (1.0 + np.exp(-x.value))
    out = tape.node(y)
    if tape.record:
        def bwd(gbuf, g):
            _acc(gbuf, x, g * y * (1.0 - y))
        out.backward_fn = bwd
    return out


def tanh(tape, x):
    x = tape.lift(x)
    y = np.tanh(x.value)
    out = tape.node(y)
    if tape.record:
        def bwd(gbuf, g):
            _acc(gbuf, x, g * (1.0 - y * y))
        out.backward_fn = bwd
    return out


def add(tape, a, b):
    a, b = tape.lift(a), tape.lift(b)
    if a.value.shape != b.value.shape:
        raise DimensionError("add: shapes %s and %s differ"
                             % (a.value.shape, b.value.shape))
    out = tape.node(a.value + b.value)
    if tape.record:
        def bwd(gbuf, g):
            _acc(gbuf, a, g)
            _acc(gbuf, b, g)
        out.backward_fn = bwd
    return out


def mul(tape, a, b):
    a, b = tape.lift(a), tape.lift(b)
    if a.value.shape != b.value.shape:
        raise DimensionError("mul: shapes %s and %s differ"
                             % (a.value.shape, b.value.shape))
    out = tape.node(a.value * b.value)
    if tape.record:
        def bwd(gbuf, g):
            _acc(gbuf, a, g * b.value)
            _acc(gbuf, b, g * a.value)
        out.backward_fn = bwd
    return out


def nsum(tape, nodes):
    """Elementwise sum of same-shape nodes (used to total per-token losses)."""
    nodes = [tape.lift(n) for n in nodes]
    if not nodes:
        raise ValueError("nsum: empty node list")
    out = tape.node(sum(n.value for n in nodes))
    if tape.record:
        def bwd(gbuf, g):
            for n in nodes:
                _acc(gbuf, n, g)
        out.backward_fn = bwd
    return out


def vsum(tape, x):
    x = tape.lift(x)
    out = tape.node(x.value.sum())
    if tape.record:
        def bwd(gbuf, g):
            _acc(gbuf, x, np.full_like(x.value, float(g)))
        out.backward_fn = bwd
    return out


def column(tape, M, j):
    """Select column j of a matrix; gradient flows only to that column."""
    M = tape.lift(M)
    if not 0 <= j < M.value.shape[1]:
        raise IndexError("column index %d out of range for shape %s"
                         % (j, M.value.shape))
    out = tape.node(M.value[:, j].copy())
    if tape.record:
        def bwd(gbuf, g):
            delta = np.zeros_like(M.value)
            delta[:, j] = g
            _acc(gbuf, M, delta)
        out.backward_fn = bwd
    return out


def softmax(tape, logits):
    """Max-subtracted softmax; output sums to 1 within 1e-12."""
    logits = tape.lift(logits)
    z = logits.value
    if z.size == 0:
        raise ValueError("softmax: empty logits")
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax: non-finite logits")
    e = np.exp(z - z.max())
    y = e / e.sum()
    out = tape.node(y)
    if tape.record:
        def bwd(gbuf, g):
            _acc(gbuf, logits, y * (g - np.dot(y, g)))
        out.backward_fn = bwd
    return out


def cross_entropy(tape, dist, target):
    """-ln dist[target] for a probability vector."""
    dist = tape.lift(dist)
    if not 0 <= target < dist.value.shape[0]:
        raise IndexError("cross_entropy: target %d out of range %d"
                         % (target, dist.value.shape[0]))
    p = dist.value[target]
    out = tape.node(-np.log(p))
    if tape.record:
        def bwd(gbuf, g):
            delta = np.zeros_like(dist.value)
            delta[target] = -float(g) / p
            _acc(gbuf, dist, delta)
        out.backward_fn = bwd
    return out


def log_softmax_values(logits):
    """Numerically stable log-softmax on a plain array (evaluation path)."""
    z = np.asarray(logits, dtype=np.float64)
    m = z.max()
    s = z - m
    return s - np.log(np.exp(s).sum())


# ---------------------------------------------------------------------------
# optimizer and verification

def sgd_momentum_step(params, lr, momentum):
    """v <- momentum*v - lr*grad; value <- value + v; grad <- 0."""
    for p in params:
        p.velocity *= momentum
        p.velocity -= lr * p.grad
        p.value += p.velocity
        p.grad.fill(0.0)


def uniform_init(rng, low=-0.1, high=0.1):
    def init(shape):
        return rng.uniform(low, high, size=shape)
    return init


def zeros_init(shape):
    return np.zeros(shape)


def finite_difference_report(loss_fn, params, eps=1e-5, coords_per_param=8,
                             seed=0):
    """Per-parameter max relative error of analytic vs central-difference grads.

    loss_fn(tape) must build the loss on the given tape and be deterministic
    across calls (any randomness must be frozen by the caller).
    """
    for p in params:
        p.grad.fill(0.0)
    t = Tape()
    loss = loss_fn(t)
    backward(t, loss)
    analytic = {p.name: p.grad.copy() for p in params}
    for p in params:
        p.grad.fill(0.0)

    rng = np.random.default_rng(seed)
    report = {}
    for p in params:
        flat = p.value.reshape(-1)
        n = flat.size
        if n <= coords_per_param:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=coords_per_param, replace=False)
        worst = 0.0
        for i in coords:
            orig = flat[i]
            flat[i] = orig + eps
            lo_hi = float(loss_fn(Tape(record=False)).value)
            flat[i] = orig - eps
            lo_lo = float(loss_fn(Tape(record=False)).value)
            flat[i] = orig
            numeric = (lo_hi - lo_lo) / (2.0 * eps)
            a = analytic[p.name].reshape(-1)[i]
            rel = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
            worst = max(worst, rel)
        report[p.name] = worst
    return report


def finite_difference_check(loss_fn, params, eps=1e-5, coords_per_param=8,
                            seed=0):
    """Max relative error over all sampled coordinates of all parameters."""
    report = finite_difference_report(loss_fn, params, eps=eps,
                                      coords_per_param=coords_per_param,
                                      seed=seed)
    return max(report.values()) if report else 0.0
