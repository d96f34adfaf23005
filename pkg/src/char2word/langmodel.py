"""Recurrent LSTM language model over word embeddings with a pruned,
lowercased output vocabulary and dev-perplexity model selection."""

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import corpus as corpus_mod
from . import embeddings as emb_mod
from .autodiff import (Parameter, Tape, backward, cross_entropy, linsum,
                       log_softmax_values, nsum, sgd_momentum_step, softmax,
                       uniform_init)
from .lstm import LstmParams, lstm_forward


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class LmConfig:
    embedder: str = emb_mod.C2W
    apply_tanh: bool = False
    d: int = 50
    d_char: int = 50
    d_char_state: int = 150
    d_lm_state: int = 150
    lr: float = 0.2
    momentum: float = 0.95
    batch_sentences: int = 100
    out_vocab_size: int = 5000
    input_vocab_size: int = 0  # 0 = keep every training type (open input)
    singleton_unk_prob: float = 0.5
    cache_capacity: int = 10000
    max_epochs: int = 30
    seed: int = 1


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    dev_metric: float
    seconds: float
    words_per_sec: float


@dataclass
class TrainResult:
    model: object
    history: list = field(default_factory=list)
    best_epoch: int = 0
    best_metric: float = float("inf")


class LmModel:
    kind = "lm"

    def __init__(self, cfg, embedder, out_vocab, init):
        self.cfg = cfg
        self.embedder = embedder
        self.out_vocab = out_vocab
        # creation order below fixes the checkpoint registry order
        self.start_vec = Parameter("lm.start", init((cfg.d,)))
        self.seq = LstmParams("lm.seq", cfg.d, cfg.d_lm_state, init)
        self.out_proj = Parameter("lm.out_proj",
                                  init((len(out_vocab), cfg.d_lm_state)))
        self.out_bias = Parameter("lm.out_bias", init((len(out_vocab),)))
        self.dev_metric = None
        self.best_epoch = None

    def parameters(self):
        return (self.embedder.parameters() + [self.start_vec]
                + self.seq.parameters() + [self.out_proj, self.out_bias])

    def config_dict(self):
        return asdict(self.cfg)


def build_lm_model(cfg, vocab, charset, out_vocab, init):
    embedder = emb_mod.make_embedder(
        cfg.embedder, cfg.d, cfg.d_char, cfg.d_char_state, vocab, charset,
        init, apply_tanh=cfg.apply_tanh, singleton_prob=cfg.singleton_unk_prob)
    return LmModel(cfg, embedder, out_vocab, init)


def target_ids(model, sentence):
    """Output ids: each token (lowercased, OOV -> unknown) then end-of-sentence."""
    out = model.out_vocab
    return [out.lookup(w) for w in sentence] + [out.eos_id]


def lm_loss(tape, model, batch, rng=None, training=False,
            share_compositions=True):
    """Summed cross-entropy over all sentences and positions of the batch.

    With share_compositions, repeated character sequences within the batch
    are composed once; the shared node accumulates every use's gradient.
    """
    if not batch:
        raise ValueError("lm_loss: empty batch")
    memo = {} if share_compositions else None
    losses = []
    for sentence in batch:
        if not sentence:
            raise ValueError("lm_loss: empty sentence")
        inputs = [tape.param(model.start_vec)]
        inputs += [model.embedder.node(tape, w, rng=rng, training=training,
                                       memo=memo) for w in sentence]
        states = lstm_forward(tape, model.seq, inputs)
        targets = target_ids(model, sentence)
        for (h, _), tgt in zip(states, targets):
            logits = linsum(tape, [(model.out_proj, h)], model.out_bias)
            losses.append(cross_entropy(tape, softmax(tape, logits), tgt))
    return nsum(tape, losses)


def lm_forward(model, sentence):
    """Per-position log-probability rows over the output vocabulary.

    Row i predicts token i of the sentence; the final row predicts the
    end-of-sentence event. Evaluation path: no unknown-policy randomness.
    """
    if not sentence:
        raise ValueError("lm_forward: empty sentence")
    tape = Tape(record=False)
    inputs = [tape.param(model.start_vec)]
    inputs += [tape.const(model.embedder.vector(w)) for w in sentence]
    states = lstm_forward(tape, model.seq, inputs)
    rows = []
    for h, _ in states:
        logits = model.out_proj.value @ h.value + model.out_bias.value
        rows.append(log_softmax_values(logits))
    return rows


def perplexity(model, sentences):
    """exp(total NLL / total predicted tokens), natural base; end-of-sentence
    and unknown targets count as predictions."""
    if not sentences:
        raise ValueError("perplexity: empty corpus")
    nll = 0.0
    count = 0
    for sentence in sentences:
        rows = lm_forward(model, sentence)
        for row, tgt in zip(rows, target_ids(model, sentence)):
            nll -= row[tgt]
            count += 1
    return float(np.exp(nll / count))


def train_lm(cfg, train_sentences, dev_sentences, lookup_init_hook=None):
    """Minibatch SGD-with-momentum training with per-epoch dev selection.

    Returns a TrainResult whose model carries the parameters of the epoch
    with the lowest dev perplexity. Fully deterministic given cfg.seed.
    """
    if not train_sentences or not dev_sentences:
        raise ValueError("train_lm: empty corpus")
    rng = np.random.default_rng(cfg.seed)
    init = uniform_init(rng)

    vocab = corpus_mod.build_vocab(
        train_sentences, max_size=cfg.input_vocab_size or None, lowercase=True)
    out_vocab = corpus_mod.build_vocab(
        train_sentences, max_size=cfg.out_vocab_size, lowercase=True,
        sentinels=(corpus_mod.UNK, corpus_mod.BOS, corpus_mod.EOS))
    charset = (corpus_mod.build_charset(train_sentences)
               if cfg.embedder in (emb_mod.C2W, emb_mod.COMBINED) else None)

    model = build_lm_model(cfg, vocab, charset, out_vocab, init)
    if lookup_init_hook is not None and model.embedder.lookup is not None:
        lookup_init_hook(model.embedder.lookup)
    params = model.parameters()

    result = TrainResult(model)
    best_values = None
    for epoch in range(1, cfg.max_epochs + 1):
        t0 = time.perf_counter()
        batches = corpus_mod.make_batches(train_sentences,
                                          cfg.batch_sentences, rng)
        epoch_loss = 0.0
        n_words = 0
        for bi, batch in enumerate(batches):
            tape = Tape()
            loss = lm_loss(tape, model, batch, rng=rng, training=True)
            if not np.isfinite(loss.value):
                raise TrainingDiverged(
                    "non-finite loss at epoch %d, batch %d" % (epoch, bi))
            epoch_loss += float(loss.value)
            n_words += sum(len(s) for s in batch)
            predictions = sum(len(s) + 1 for s in batch)
            backward(tape, loss, seed=1.0 / predictions)
            sgd_momentum_step(params, cfg.lr, cfg.momentum)
            if model.embedder.cache is not None:
                model.embedder.cache.bump_generation()
        seconds = time.perf_counter() - t0
        dev_ppl = perplexity(model, dev_sentences)
        result.history.append(EpochStats(
            epoch, epoch_loss, dev_ppl, seconds,
            n_words / seconds if seconds > 0 else 0.0))
        if dev_ppl < result.best_metric:
            result.best_metric = dev_ppl
            result.best_epoch = epoch
            best_values = [p.value.copy() for p in params]
    if best_values is not None:
        for p, v in zip(params, best_values):
            p.value[:] = v
    model.dev_metric = result.best_metric
    model.best_epoch = result.best_epoch
    return result
