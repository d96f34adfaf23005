import numpy as np
import pytest

from char2word.autodiff import (Tape, backward, finite_difference_check, mul,
                                uniform_init, vsum, zeros_init)
from char2word.corpus import CharVocabulary, Vocabulary
from char2word.embeddings import (C2WParams, Embedder, EmbeddingCache,
                                  WordLookupTable, c2w_composition_count,
                                  cache_get_or_compose, compose_word,
                                  count_parameters, lookup_word,
                                  make_embedder, nearest_neighbors)

from oracles import scalar_compose


def small_vocab():
    return Vocabulary([("ab", 3), ("cat", 2), ("dog", 1)], lowercase=True)


def small_charset():
    return CharVocabulary([(c, 2) for c in "abcdgot"] + [("C", 1)])


def small_c2w(seed=0, scale=0.5):
    rng = np.random.default_rng(seed)
    return C2WParams(9, 3, 4, 2, uniform_init(rng, -scale, scale))


def test_lookup_column_extraction():
    vocab = small_vocab()
    table = WordLookupTable(vocab, 2, zeros_init)
    table.P.value[:, 1] = [7.0, 8.0]
    assert np.array_equal(lookup_word(table, 1), [7.0, 8.0])


def test_lookup_gradient_touches_one_column():
    vocab = small_vocab()
    rng = np.random.default_rng(1)
    table = WordLookupTable(vocab, 3, uniform_init(rng))
    t = Tape()
    e = table.column_node(t, 1)
    backward(t, vsum(t, mul(t, e, e)))
    grad = table.P.grad
    assert np.count_nonzero(grad[:, [0, 2, 3]]) == 0
    assert np.allclose(grad[:, 1], 2.0 * table.P.value[:, 1])


def test_lookup_of_unknown_id_is_the_trained_unknown_column():
    vocab = small_vocab()
    rng = np.random.default_rng(2)
    table = WordLookupTable(vocab, 3, uniform_init(rng))
    wid = vocab.lookup("neverseen")
    assert wid == vocab.unk_id
    assert np.array_equal(lookup_word(table, wid), table.P.value[:, wid])


def test_compose_zero_lstms_returns_bias():
    p = C2WParams(9, 3, 4, 2, zeros_init)
    p.b_d.value[:] = 1.0
    out = compose_word(Tape(), p, [1, 2, 3])
    assert np.array_equal(out.value, [1.0, 1.0])
    out = compose_word(Tape(), p, [5])
    assert np.array_equal(out.value, [1.0, 1.0])


def test_compose_rejects_empty_word():
    with pytest.raises(ValueError, match="empty"):
        compose_word(Tape(), small_c2w(), [])


def test_compose_matches_scalar_oracle():
    p = small_c2w(seed=5)
    ids = [1, 2]
    out = compose_word(Tape(), p, ids)
    assert np.all(np.abs(out.value - scalar_compose(p, ids)) < 1e-12)


def test_compose_single_char_uses_both_directions():
    p = small_c2w(seed=6)
    out = compose_word(Tape(), p, [3])
    assert np.all(np.abs(out.value - scalar_compose(p, [3])) < 1e-12)


def test_anagrams_get_distinct_embeddings():
    p = small_c2w(seed=7)
    dog = compose_word(Tape(), p, [4, 5, 6]).value
    god = compose_word(Tape(), p, [6, 5, 4]).value
    assert np.linalg.norm(dog - god) > 1e-6


def test_compose_is_deterministic():
    p = small_c2w(seed=8)
    a = compose_word(Tape(), p, [1, 2, 3]).value
    b = compose_word(Tape(), p, [1, 2, 3]).value
    assert np.array_equal(a, b)


def test_case_sensitivity_of_character_branch():
    vocab = small_vocab()
    charset = small_charset()
    rng = np.random.default_rng(9)
    emb = make_embedder("c2w", 2, 3, 4, vocab, charset, uniform_init(rng))
    assert np.linalg.norm(emb.vector("Cat") - emb.vector("cat")) > 1e-8


def test_compose_gradients_reach_every_group():
    p = small_c2w(seed=10, scale=1.0)

    def loss_fn(tape):
        e = compose_word(tape, p, [1, 2, 7])
        return vsum(tape, mul(tape, e, e))

    assert finite_difference_check(loss_fn, p.parameters(),
                                   coords_per_param=4) < 1e-4


def test_embed_combined_with_zero_lookup_equals_c2w():
    vocab = small_vocab()
    charset = small_charset()
    rng = np.random.default_rng(11)
    emb = make_embedder("combined", 2, 3, 4, vocab, charset,
                        uniform_init(rng))
    emb.lookup.P.value.fill(0.0)
    c2w_only = compose_word(Tape(record=False), emb.c2w,
                            charset.encode_word("cat")).value
    assert np.array_equal(emb.vector("cat"), c2w_only)
    emb.apply_tanh = True
    assert np.array_equal(emb.vector("cat"), np.tanh(c2w_only))


def test_embed_combined_with_zero_c2w_is_lookup_plus_bias():
    vocab = small_vocab()
    charset = small_charset()
    rng = np.random.default_rng(12)
    emb = make_embedder("combined", 2, 3, 4, vocab, charset,
                        uniform_init(rng))
    for p in emb.c2w.parameters():
        p.value.fill(0.0)
    expected = emb.c2w.b_d.value + emb.lookup.vector(vocab.lookup("cat"))
    assert np.allclose(emb.vector("cat"), expected, atol=1e-15)


def test_open_vocabulary_contract_for_unseen_words():
    vocab = small_vocab()
    charset = small_charset()
    rng = np.random.default_rng(13)
    emb = make_embedder("c2w", 2, 3, 4, vocab, charset, uniform_init(rng))
    vec = emb.vector("Frenchification")
    assert vec.shape == (2,)
    assert np.all(np.isfinite(vec))
    other = emb.vector("Frenchificatoin")
    assert np.linalg.norm(vec - other) > 1e-10


def test_cache_hit_skips_composition():
    p = small_c2w(seed=14)
    cache = EmbeddingCache(capacity=10)
    v1 = cache_get_or_compose(cache, p, "ab", [1, 2])
    calls = p.compose_calls
    v2 = cache_get_or_compose(cache, p, "ab", [1, 2])
    assert p.compose_calls == calls
    assert cache.hits == 1 and cache.misses == 1
    assert np.array_equal(v1, v2)


def test_cache_invalidated_by_generation_bump():
    p = small_c2w(seed=15)
    cache = EmbeddingCache(capacity=10)
    cache_get_or_compose(cache, p, "ab", [1, 2])
    cache.bump_generation()
    calls = p.compose_calls
    cache_get_or_compose(cache, p, "ab", [1, 2])
    assert p.compose_calls == calls + 1


def test_cache_respects_capacity_and_admission():
    p = small_c2w(seed=16)
    cache = EmbeddingCache(capacity=1, admissible={"ab", "cd"})
    cache_get_or_compose(cache, p, "zz", [3, 3])
    assert "zz" not in cache.entries  # not admissible
    cache_get_or_compose(cache, p, "ab", [1, 2])
    cache_get_or_compose(cache, p, "cd", [2, 4])
    assert len(cache.entries) == 1


def test_batch_memo_composes_repeated_word_once():
    vocab = small_vocab()
    charset = small_charset()
    rng = np.random.default_rng(17)
    emb = make_embedder("c2w", 2, 3, 4, vocab, charset, uniform_init(rng))
    tape = Tape()
    memo = {}
    nodes = [emb.node(tape, "cat", memo=memo) for _ in range(10)]
    assert emb.c2w.compose_calls == 1
    assert all(n is nodes[0] for n in nodes)


def test_count_parameters_lookup_anchor():
    words = [("w%05d" % i, 1) for i in range(79999)]  # + unk sentinel = 80000
    vocab = Vocabulary(words)
    table = WordLookupTable(vocab, 50, zeros_init)
    assert count_parameters(table)["lookup.P"] == 4_000_000


def test_count_parameters_char_table_anchor_and_closed_form():
    p = C2WParams(618, 50, 150, 50, zeros_init)
    breakdown = count_parameters(p)
    assert breakdown["c2w.P_C"] == 30_900
    composition = breakdown["total"] - breakdown["c2w.P_C"]
    assert composition == c2w_composition_count(50, 150, 50)
    assert 4_000_000 >= 8 * composition


def test_nearest_neighbors_excludes_query_and_breaks_ties():
    vocab = Vocabulary([("aa", 1), ("bb", 1), ("cc", 1)])
    table = WordLookupTable(vocab, 2, zeros_init)
    table.P.value[:, vocab.lookup("aa")] = [1.0, 0.0]
    table.P.value[:, vocab.lookup("bb")] = [2.0, 0.0]
    table.P.value[:, vocab.lookup("cc")] = [3.0, 0.0]
    emb = Embedder("lookup", 2, lookup=table, vocab=vocab)
    ranked, skipped = nearest_neighbors(emb, "aa", ["aa", "bb", "cc"], 5)
    assert [w for w, _ in ranked] == ["bb", "cc"]  # tie at cosine 1.0
    assert all(abs(c - 1.0) < 1e-12 for _, c in ranked)
    assert skipped == 0


def test_nearest_neighbors_skips_zero_norm():
    vocab = Vocabulary([("aa", 1), ("bb", 1)])
    table = WordLookupTable(vocab, 2, zeros_init)
    table.P.value[:, vocab.lookup("aa")] = [1.0, 1.0]
    emb = Embedder("lookup", 2, lookup=table, vocab=vocab)
    ranked, skipped = nearest_neighbors(emb, "aa", ["bb"], 3)
    assert ranked == [] and skipped == 1
