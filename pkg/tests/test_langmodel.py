import math

import numpy as np
import pytest

from char2word.autodiff import Tape
from char2word.langmodel import (LmConfig, lm_forward, lm_loss, perplexity,
                                 train_lm)

from conftest import TOY_SENTENCES, bigram_corpus, tiny_lm_model


def _zero_output_layer(model):
    model.out_proj.value.fill(0.0)
    model.out_bias.value.fill(0.0)


def test_zeroed_outputs_give_uniform_rows():
    model, _ = tiny_lm_model()
    _zero_output_layer(model)
    rows = lm_forward(model, ["ab", "cda"])
    v = len(model.out_vocab)
    for row in rows:
        assert np.allclose(row, -math.log(v), atol=1e-12)


def test_one_word_sentence_gives_two_predictions():
    model, _ = tiny_lm_model()
    assert len(lm_forward(model, ["ab"])) == 2


def test_rows_exponentiate_to_valid_distributions():
    model, _ = tiny_lm_model(seed=3)
    for row in lm_forward(model, ["ab", "cda", "b"]):
        assert abs(np.exp(row).sum() - 1.0) < 1e-9


def test_forward_rejects_empty_sentence():
    model, _ = tiny_lm_model()
    with pytest.raises(ValueError):
        lm_forward(model, [])


def test_loss_of_single_word_sentence_with_zero_outputs():
    model, _ = tiny_lm_model()
    _zero_output_layer(model)
    loss = lm_loss(Tape(record=False), model, [["ab"]])
    assert abs(float(loss.value) - 2 * math.log(len(model.out_vocab))) < 1e-12


def test_duplicated_sentence_doubles_loss():
    model, _ = tiny_lm_model(seed=5)
    one = lm_loss(Tape(record=False), model, [["ab", "cda"]])
    two = lm_loss(Tape(record=False), model, [["ab", "cda"], ["ab", "cda"]])
    assert float(two.value) == 2 * float(one.value)


def test_shared_compositions_match_naive_recomputation_bitwise():
    model, _ = tiny_lm_model(seed=6)
    batch = [["ab", "ab", "cda"], ["ab", "b", "b"]]
    shared = lm_loss(Tape(record=False), model, batch,
                     share_compositions=True)
    calls_shared = model.embedder.c2w.compose_calls
    model.embedder.c2w.compose_calls = 0
    naive = lm_loss(Tape(record=False), model, batch,
                    share_compositions=False)
    assert float(shared.value) == float(naive.value)
    assert model.embedder.c2w.compose_calls == 6  # one per token
    assert calls_shared == 3  # one per distinct character sequence


def test_uniform_model_perplexity_equals_vocab_size():
    model, sentences = tiny_lm_model(seed=7)
    _zero_output_layer(model)
    v = len(model.out_vocab)
    assert abs(perplexity(model, sentences) - v) / v < 1e-6


def test_perplexity_invariant_to_sentence_order():
    model, sentences = tiny_lm_model(seed=8)
    p1 = perplexity(model, sentences)
    p2 = perplexity(model, list(reversed(sentences)))
    assert abs(p1 - p2) / p1 < 1e-12


def test_perplexity_is_deterministic_across_passes():
    model, sentences = tiny_lm_model(seed=9)
    assert perplexity(model, sentences) == perplexity(model, sentences)


def test_c2w_eval_never_uses_word_level_unknown():
    model, _ = tiny_lm_model(seed=10)
    oov = ["ddda", "adad"]  # unseen words over in-charset characters
    vecs = [model.embedder.vector(w) for w in oov]
    assert np.all(np.isfinite(vecs))
    assert np.linalg.norm(vecs[0] - vecs[1]) > 1e-10


def test_train_zero_lr_leaves_parameters_unchanged():
    cfg = LmConfig(embedder="c2w", d=4, d_char=3, d_char_state=5,
                   d_lm_state=6, out_vocab_size=7, lr=0.0, max_epochs=1,
                   batch_sentences=2, seed=1)
    result = train_lm(cfg, TOY_SENTENCES, TOY_SENTENCES[:1])
    before = train_lm(cfg, TOY_SENTENCES, TOY_SENTENCES[:1])
    for p, q in zip(result.model.parameters(), before.model.parameters()):
        assert np.array_equal(p.value, q.value)
    # and identical to a freshly initialized model with the same seed
    fresh, _ = tiny_lm_model(seed=1, sentences=TOY_SENTENCES)
    for p, q in zip(result.model.parameters(), fresh.parameters()):
        assert np.array_equal(p.value, q.value)


def test_train_is_deterministic_given_seed():
    cfg = LmConfig(embedder="combined", d=4, d_char=3, d_char_state=5,
                   d_lm_state=6, out_vocab_size=7, max_epochs=2,
                   batch_sentences=2, seed=12)
    r1 = train_lm(cfg, TOY_SENTENCES, TOY_SENTENCES[:1])
    r2 = train_lm(cfg, TOY_SENTENCES, TOY_SENTENCES[:1])
    for p, q in zip(r1.model.parameters(), r2.model.parameters()):
        assert np.array_equal(p.value, q.value)
    assert r1.best_metric == r2.best_metric


def test_training_reduces_dev_perplexity_on_bigram_corpus():
    corpus = bigram_corpus(n_sentences=20, length=5)
    cfg = LmConfig(embedder="lookup", d=8, d_lm_state=8, out_vocab_size=20,
                   lr=0.05, momentum=0.9, batch_sentences=5, max_epochs=8,
                   seed=2)
    result = train_lm(cfg, corpus, corpus[:5])
    assert result.best_metric < result.history[0].dev_metric
    # the returned model carries the best-epoch parameters
    assert abs(perplexity(result.model, corpus[:5]) - result.best_metric) < 1e-9
