"""Finite-difference verification suites for the full language model and
tagger losses at tiny dimensions, reported per parameter group."""

import numpy as np

from . import corpus as corpus_mod
from . import embeddings as emb_mod
from .autodiff import (add, finite_difference_report, mul, uniform_init, vsum)
from .langmodel import LmConfig, build_lm_model, lm_loss
from .tagger import TaggerConfig, build_tagger_model, tagger_loss

TOLERANCE = 1e-4

LM_SENTENCES = [["ab", "cda", "b"], ["cab", "ab"]]
TAGGED = [
    corpus_mod.TaggedSentence(["ab", "cda", "b"], ["T1", "T2", "T3"]),
    corpus_mod.TaggedSentence(["cab", "da", "b"], ["T4", "T5", "T1"]),
]

_GROUPS = (
    ("c2w.fwd.", "c2w_forward_lstm"),
    ("c2w.bwd.", "c2w_backward_lstm"),
    ("c2w.P_C", "char_table"),
    ("c2w.D_f", "combiner_forward"),
    ("c2w.D_b", "combiner_backward"),
    ("c2w.b_d", "combiner_bias"),
    ("lookup.P", "lookup_table"),
    ("lm.start", "start_vector"),
    ("lm.seq.", "sequence_lstm"),
    ("lm.out_", "output_projection"),
    ("tagger.fwd.", "word_forward_lstm"),
    ("tagger.bwd.", "word_backward_lstm"),
    ("tagger.L_", "state_combiner"),
    ("tagger.b_l", "state_combiner"),
    ("tagger.tag_", "tag_projection"),
)


def group_of(param_name):
    for prefix, group in _GROUPS:
        if param_name.startswith(prefix):
            return group
    return param_name


def _grouped(report):
    grouped = {}
    for name, err in report.items():
        group = group_of(name)
        grouped[group] = max(grouped.get(group, 0.0), err)
    return grouped


def _tiny_lm(seed):
    cfg = LmConfig(embedder=emb_mod.COMBINED, d=4, d_char=3, d_char_state=5,
                   d_lm_state=6, out_vocab_size=7, seed=seed)
    rng = np.random.default_rng(seed)
    # verification runs at a larger parameter scale than training init so
    # every gradient sits well above central-difference noise (~1e-10)
    init = uniform_init(rng, -1.0, 1.0)
    vocab = corpus_mod.build_vocab(LM_SENTENCES, lowercase=True)
    out_vocab = corpus_mod.build_vocab(
        LM_SENTENCES, max_size=cfg.out_vocab_size, lowercase=True,
        sentinels=(corpus_mod.UNK, corpus_mod.BOS, corpus_mod.EOS))
    charset = corpus_mod.build_charset(LM_SENTENCES)
    model = build_lm_model(cfg, vocab, charset, out_vocab, init)

    def loss_fn(tape):
        return lm_loss(tape, model, LM_SENTENCES)

    return model, loss_fn


def _tiny_tagger(seed):
    cfg = TaggerConfig(embedder=emb_mod.COMBINED, d=4, d_char=3,
                       d_char_state=5, d_word_state=6, seed=seed)
    rng = np.random.default_rng(seed)
    init = uniform_init(rng, -1.0, 1.0)
    token_lists = [s.tokens for s in TAGGED]
    vocab = corpus_mod.build_vocab(token_lists, lowercase=True)
    charset = corpus_mod.build_charset(token_lists)
    tagset = corpus_mod.build_tagset(TAGGED)
    model = build_tagger_model(cfg, vocab, charset, tagset, init)

    def loss_fn(tape):
        return tagger_loss(tape, model, TAGGED)

    return model, loss_fn


def _with_corruption(loss_fn, param):
    """Adds a term seen only by the recording pass, so analytic gradients for
    `param` disagree with finite differences (verification test hook)."""
    def corrupted(tape):
        loss = loss_fn(tape)
        if tape.record:
            loss = add(tape, loss,
                       mul(tape, vsum(tape, tape.param(param)),
                           tape.const(np.asarray(1e-2))))
        return loss
    return corrupted


def run_gradcheck(seed=0, coords_per_param=6, corrupt_group=None):
    """Returns {"lm": {group: max rel err}, "tagger": {...}}."""
    results = {}
    for suite, builder in (("lm", _tiny_lm), ("tagger", _tiny_tagger)):
        model, loss_fn = builder(seed)
        params = model.parameters()
        if corrupt_group is not None:
            for p in params:
                if group_of(p.name) == corrupt_group:
                    loss_fn = _with_corruption(loss_fn, p)
                    break
        report = finite_difference_report(loss_fn, params,
                                          coords_per_param=coords_per_param,
                                          seed=seed)
        results[suite] = _grouped(report)
    return results
