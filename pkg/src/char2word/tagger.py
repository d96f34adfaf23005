"""Bi-LSTM part-of-speech tagger: forward and backward word-level LSTMs
combined per position through a tanh layer, then a softmax over the tagset."""

import time
from dataclasses import dataclass, asdict

import numpy as np

from . import corpus as corpus_mod
from . import embeddings as emb_mod
from .autodiff import (Parameter, Tape, backward, cross_entropy, linsum,
                       nsum, sgd_momentum_step, softmax, tanh, uniform_init)
from .langmodel import EpochStats, TrainResult, TrainingDiverged
from .lstm import LstmParams, lstm_forward


class EvaluationError(ValueError):
    pass


@dataclass
class TaggerConfig:
    embedder: str = emb_mod.C2W
    apply_tanh: bool = False
    d: int = 50
    d_char: int = 50
    d_char_state: int = 150
    d_word_state: int = 50
    lr: float = 0.2
    momentum: float = 0.95
    batch_sentences: int = 100
    input_vocab_size: int = 0  # 0 = keep every training type
    singleton_unk_prob: float = 0.5
    cache_capacity: int = 10000
    max_epochs: int = 30
    seed: int = 1


class TaggerModel:
    kind = "tagger"

    def __init__(self, cfg, embedder, tagset, init):
        self.cfg = cfg
        self.embedder = embedder
        self.tagset = tagset
        d_ws = cfg.d_word_state
        # creation order below fixes the checkpoint registry order
        self.fwd = LstmParams("tagger.fwd", cfg.d, d_ws, init)
        self.bwd = LstmParams("tagger.bwd", cfg.d, d_ws, init)
        self.L_f = Parameter("tagger.L_f", init((d_ws, d_ws)))
        self.L_b = Parameter("tagger.L_b", init((d_ws, d_ws)))
        self.b_l = Parameter("tagger.b_l", init((d_ws,)))
        self.tag_proj = Parameter("tagger.tag_proj", init((len(tagset), d_ws)))
        self.tag_bias = Parameter("tagger.tag_bias", init((len(tagset),)))
        self.dev_metric = None
        self.best_epoch = None

    def parameters(self):
        return (self.embedder.parameters()
                + self.fwd.parameters() + self.bwd.parameters()
                + [self.L_f, self.L_b, self.b_l,
                   self.tag_proj, self.tag_bias])

    def config_dict(self):
        return asdict(self.cfg)


def build_tagger_model(cfg, vocab, charset, tagset, init):
    embedder = emb_mod.make_embedder(
        cfg.embedder, cfg.d, cfg.d_char, cfg.d_char_state, vocab, charset,
        init, apply_tanh=cfg.apply_tanh, singleton_prob=cfg.singleton_unk_prob)
    return TaggerModel(cfg, embedder, tagset, init)


def _combined_states(tape, model, inputs):
    """l_i = tanh(L_f s^f_i + L_b s^b_i + b_l): position i pairs the forward
    state over tokens 1..i with the backward state over tokens n..i."""
    n = len(inputs)
    fwd_states = lstm_forward(tape, model.fwd, inputs)
    bwd_states = lstm_forward(tape, model.bwd, list(reversed(inputs)))
    combined = []
    for i in range(n):
        s_f = fwd_states[i][0]
        s_b = bwd_states[n - 1 - i][0]
        combined.append(tanh(tape, linsum(
            tape, [(model.L_f, s_f), (model.L_b, s_b)], model.b_l)))
    return combined


def tag_distributions(tape, model, tokens, rng=None, training=False, memo=None):
    """Per-token tag distribution nodes (shared by loss and decoding)."""
    if not tokens:
        raise ValueError("tag_distributions: empty sentence")
    inputs = [model.embedder.node(tape, w, rng=rng, training=training,
                                  memo=memo) for w in tokens]
    dists = []
    for l_i in _combined_states(tape, model, inputs):
        logits = linsum(tape, [(model.tag_proj, l_i)], model.tag_bias)
        dists.append(softmax(tape, logits))
    return dists


def tag_forward(model, tokens):
    """Per-token tag distributions as plain arrays (frozen-model path)."""
    if not tokens:
        raise ValueError("tag_forward: empty sentence")
    tape = Tape(record=False)
    inputs = [tape.const(model.embedder.vector(w)) for w in tokens]
    rows = []
    for l_i in _combined_states(tape, model, inputs):
        logits = model.tag_proj.value @ l_i.value + model.tag_bias.value
        e = np.exp(logits - logits.max())
        rows.append(e / e.sum())
    return rows


def tag_sentence(model, tokens):
    """Position-wise argmax decoding; ties break toward the lowest tag id."""
    return [model.tagset.word(int(np.argmax(row)))
            for row in tag_forward(model, tokens)]


def tagger_loss(tape, model, batch, rng=None, training=False,
                share_compositions=True):
    """Summed per-token cross-entropy against gold tags over the batch."""
    if not batch:
        raise ValueError("tagger_loss: empty batch")
    memo = {} if share_compositions else None
    losses = []
    for sent in batch:
        dists = tag_distributions(tape, model, sent.tokens, rng=rng,
                                  training=training, memo=memo)
        for dist, tag in zip(dists, sent.tags):
            losses.append(cross_entropy(tape, dist, model.tagset.stoi[tag]))
    return nsum(tape, losses)


def tagging_accuracy(model, tagged_sentences):
    """Micro-averaged token accuracy; unseen gold tags are an error."""
    if not tagged_sentences:
        raise ValueError("tagging_accuracy: empty corpus")
    correct = 0
    total = 0
    for sent in tagged_sentences:
        for tag in sent.tags:
            if tag not in model.tagset.stoi:
                raise EvaluationError("gold tag %r not in the tagset" % tag)
        predicted = tag_sentence(model, sent.tokens)
        correct += sum(p == g for p, g in zip(predicted, sent.tags))
        total += len(sent.tags)
    return correct / total


def train_tagger(cfg, train_tagged, dev_tagged, lookup_init_hook=None):
    """Same loop shape as language-model training; the returned model carries
    the parameters of the epoch with the highest dev accuracy (earliest on
    ties). Fully deterministic given cfg.seed."""
    if not train_tagged or not dev_tagged:
        raise ValueError("train_tagger: empty corpus")
    rng = np.random.default_rng(cfg.seed)
    init = uniform_init(rng)

    token_lists = [s.tokens for s in train_tagged]
    vocab = corpus_mod.build_vocab(
        token_lists, max_size=cfg.input_vocab_size or None, lowercase=True)
    charset = (corpus_mod.build_charset(token_lists)
               if cfg.embedder in (emb_mod.C2W, emb_mod.COMBINED) else None)
    tagset = corpus_mod.build_tagset(train_tagged)

    model = build_tagger_model(cfg, vocab, charset, tagset, init)
    if lookup_init_hook is not None and model.embedder.lookup is not None:
        lookup_init_hook(model.embedder.lookup)
    params = model.parameters()

    result = TrainResult(model)
    result.best_metric = -1.0
    best_values = None
    for epoch in range(1, cfg.max_epochs + 1):
        t0 = time.perf_counter()
        batches = corpus_mod.make_batches(train_tagged, cfg.batch_sentences, rng)
        epoch_loss = 0.0
        n_words = 0
        for bi, batch in enumerate(batches):
            tape = Tape()
            loss = tagger_loss(tape, model, batch, rng=rng, training=True)
            if not np.isfinite(loss.value):
                raise TrainingDiverged(
                    "non-finite loss at epoch %d, batch %d" % (epoch, bi))
            epoch_loss += float(loss.value)
            predictions = sum(len(s.tokens) for s in batch)
            n_words += predictions
            backward(tape, loss, seed=1.0 / predictions)
            sgd_momentum_step(params, cfg.lr, cfg.momentum)
            if model.embedder.cache is not None:
                model.embedder.cache.bump_generation()
        seconds = time.perf_counter() - t0
        dev_acc = tagging_accuracy(model, dev_tagged)
        result.history.append(EpochStats(
            epoch, epoch_loss, dev_acc, seconds,
            n_words / seconds if seconds > 0 else 0.0))
        if dev_acc > result.best_metric:
            result.best_metric = dev_acc
            result.best_epoch = epoch
            best_values = [p.value.copy() for p in params]
    if best_values is not None:
        for p, v in zip(params, best_values):
            p.value[:] = v
    model.dev_metric = result.best_metric
    model.best_epoch = result.best_epoch
    return result
