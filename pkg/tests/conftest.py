import numpy as np

from char2word import corpus as corpus_mod
from char2word.autodiff import uniform_init
from char2word.langmodel import LmConfig, build_lm_model
from char2word.tagger import TaggerConfig, build_tagger_model

TOY_SENTENCES = [["ab", "cda", "b"], ["cab", "ab"], ["b", "cda"]]

TOY_TAGGED = [
    corpus_mod.TaggedSentence(["ab", "cda", "b"], ["A", "B", "C"]),
    corpus_mod.TaggedSentence(["cab", "ab"], ["B", "A"]),
]


def tiny_lm_model(variant="c2w", seed=0, sentences=None, scale=0.1, **kwargs):
    sentences = sentences if sentences is not None else TOY_SENTENCES
    cfg = LmConfig(embedder=variant, d=4, d_char=3, d_char_state=5,
                   d_lm_state=6, out_vocab_size=7, seed=seed, **kwargs)
    rng = np.random.default_rng(seed)
    init = uniform_init(rng, -scale, scale)
    vocab = corpus_mod.build_vocab(sentences, lowercase=True)
    out_vocab = corpus_mod.build_vocab(
        sentences, max_size=cfg.out_vocab_size, lowercase=True,
        sentinels=(corpus_mod.UNK, corpus_mod.BOS, corpus_mod.EOS))
    charset = (corpus_mod.build_charset(sentences)
               if variant in ("c2w", "combined") else None)
    return build_lm_model(cfg, vocab, charset, out_vocab, init), sentences


def tiny_tagger_model(variant="c2w", seed=0, tagged=None, scale=0.1, **kwargs):
    tagged = tagged if tagged is not None else TOY_TAGGED
    cfg = TaggerConfig(embedder=variant, d=4, d_char=3, d_char_state=5,
                       d_word_state=6, seed=seed, **kwargs)
    rng = np.random.default_rng(seed)
    init = uniform_init(rng, -scale, scale)
    token_lists = [s.tokens for s in tagged]
    vocab = corpus_mod.build_vocab(token_lists, lowercase=True)
    charset = (corpus_mod.build_charset(token_lists)
               if variant in ("c2w", "combined") else None)
    tagset = corpus_mod.build_tagset(tagged)
    return build_tagger_model(cfg, vocab, charset, tagset, init), tagged


def bigram_corpus(n_sentences=50, length=6, n_words=10, seed=4):
    """Deterministic-bigram language: the successor of each word is fixed."""
    words = ["w%d" % i for i in range(n_words)]
    successor = {words[i]: words[(i * 3 + 1) % n_words]
                 for i in range(n_words)}
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(n_sentences):
        w = words[rng.integers(n_words)]
        sent = [w]
        for _ in range(length - 1):
            w = successor[w]
            sent.append(w)
        corpus.append(sent)
    return corpus


SUFFIXES = ["ag", "eb", "ic", "od", "uz"]


def _stems(rng, count, alphabet="bcdfghjklmnpqrstvw"):
    stems = set()
    while len(stems) < count:
        n = rng.integers(3, 6)
        stems.add("".join(alphabet[rng.integers(len(alphabet))]
                          for _ in range(n)))
    return sorted(stems)


def suffix_language(n_train=500, n_test=100, length=6, n_train_stems=120,
                    n_test_stems=40, seed=11):
    """Five-tag language where a word's tag is fully determined by its suffix;
    train and test word forms are disjoint (all test tokens unseen)."""
    rng = np.random.default_rng(seed)
    stems = _stems(rng, n_train_stems + n_test_stems)
    order = rng.permutation(len(stems))
    train_stems = [stems[i] for i in order[:n_train_stems]]
    test_stems = [stems[i] for i in order[n_train_stems:]]

    def sentences(stem_pool, count):
        out = []
        for _ in range(count):
            tokens, tags = [], []
            for _ in range(length):
                suffix_id = int(rng.integers(len(SUFFIXES)))
                stem = stem_pool[rng.integers(len(stem_pool))]
                tokens.append(stem + SUFFIXES[suffix_id])
                tags.append("T%d" % suffix_id)
            out.append(corpus_mod.TaggedSentence(tokens, tags))
        return out

    return sentences(train_stems, n_train), sentences(test_stems, n_test)
