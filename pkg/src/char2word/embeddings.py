"""Word embedders: lookup table, bidirectional character composer, and their
combination, plus the generation-stamped embedding cache and parameter
accounting."""

import numpy as np

from .autodiff import Parameter, Tape, add, column, linsum, tanh
from .lstm import LstmParams, lstm_forward

LOOKUP = "lookup"
C2W = "c2w"
COMBINED = "combined"
VARIANTS = (LOOKUP, C2W, COMBINED)


class WordLookupTable:
    """d x |V| matrix of per-type columns; column = the word's embedding."""

    def __init__(self, vocab, d, init):
        self.vocab = vocab
        self.d = d
        self.P = Parameter("lookup.P", init((d, len(vocab))))

    def column_node(self, tape, word_id):
        return column(tape, self.P, word_id)

    def vector(self, word_id):
        if not 0 <= word_id < self.P.value.shape[1]:
            raise IndexError("word id %d out of range %d"
                             % (word_id, self.P.value.shape[1]))
        return self.P.value[:, word_id].copy()

    def parameters(self):
        return [self.P]


class C2WParams:
    """Character table, forward/backward LSTMs and the state combiners."""

    def __init__(self, n_chars, d_char, d_state, d_out, init):
        self.n_chars = n_chars
        self.d_char = d_char
        self.d_state = d_state
        self.d_out = d_out
        self.P_C = Parameter("c2w.P_C", init((d_char, n_chars)))
        self.fwd = LstmParams("c2w.fwd", d_char, d_state, init)
        self.bwd = LstmParams("c2w.bwd", d_char, d_state, init)
        self.D_f = Parameter("c2w.D_f", init((d_out, d_state)))
        self.D_b = Parameter("c2w.D_b", init((d_out, d_state)))
        self.b_d = Parameter("c2w.b_d", init((d_out,)))
        self.compose_calls = 0

    def parameters(self):
        return ([self.P_C] + self.fwd.parameters() + self.bwd.parameters()
                + [self.D_f, self.D_b, self.b_d])


def compose_word(tape, p, char_ids):
    """Bidirectional composition of a word from its character ids.

    The forward LSTM reads the characters left-to-right and contributes its
    final state; the backward LSTM reads them reversed and contributes its
    final state; a linear combiner maps both to the output dimension.
    """
    if not char_ids:
        raise ValueError("compose_word: empty character sequence")
    p.compose_calls += 1
    xs = [column(tape, p.P_C, c) for c in char_ids]
    s_f = lstm_forward(tape, p.fwd, xs)[-1][0]
    s_b = lstm_forward(tape, p.bwd, list(reversed(xs)))[-1][0]
    return linsum(tape, [(p.D_f, s_f), (p.D_b, s_b)], p.b_d)


class EmbeddingCache:
    """Memo for composed word vectors, valid for one parameter generation.

    Only the admissible (most frequent) word types are stored; every entry
    is stamped with the generation at which it was computed and is served
    only while that generation is current.
    """

    def __init__(self, capacity, admissible=None):
        self.capacity = capacity
        self.admissible = set(admissible) if admissible is not None else None
        self.entries = {}
        self.generation = 0
        self.hits = 0
        self.misses = 0

    def bump_generation(self):
        """Call after any parameter update; invalidates all entries."""
        self.generation += 1

    def admits(self, word):
        return self.admissible is None or word in self.admissible


def cache_get_or_compose(cache, p, word, char_ids):
    """Cached forward-only composition, bit-identical to compose_word."""
    entry = cache.entries.get(word)
    if entry is not None and entry[1] == cache.generation:
        cache.hits += 1
        return entry[0].copy()
    cache.misses += 1
    vec = compose_word(Tape(record=False), p, char_ids).value
    if cache.admits(word) and (word in cache.entries
                               or len(cache.entries) < cache.capacity):
        cache.entries[word] = (vec.copy(), cache.generation)
    return vec


class Embedder:
    """Uniform interface over the three variants; all produce length-d vectors.

    For the lookup branch words are lowercased and passed through the word
    vocabulary (with its unknown policy); for the character branch case is
    preserved and unseen characters map to the unknown-character sentinel.
    """

    def __init__(self, variant, d, c2w=None, lookup=None, vocab=None,
                 charset=None, apply_tanh=False, singleton_prob=0.5):
        if variant not in VARIANTS:
            raise ValueError("unknown embedder variant %r" % variant)
        if variant in (LOOKUP, COMBINED) and (lookup is None or vocab is None):
            raise ValueError("%s embedder needs a lookup table and vocabulary"
                             % variant)
        if variant in (C2W, COMBINED) and (c2w is None or charset is None):
            raise ValueError("%s embedder needs C2W parameters and a charset"
                             % variant)
        self.variant = variant
        self.d = d
        self.c2w = c2w
        self.lookup = lookup
        self.vocab = vocab
        self.charset = charset
        self.apply_tanh = apply_tanh
        self.singleton_prob = singleton_prob
        self.cache = None

    def parameters(self):
        params = []
        if self.variant in (C2W, COMBINED):
            params.extend(self.c2w.parameters())
        if self.variant in (LOOKUP, COMBINED):
            params.extend(self.lookup.parameters())
        return params

    def _c2w_node(self, tape, word, rng, training, memo):
        ids = tuple(self.charset.encode_word(
            word, rng=rng, training=training,
            singleton_prob=self.singleton_prob))
        if memo is not None:
            node = memo.get(ids)
            if node is None:
                node = compose_word(tape, self.c2w, list(ids))
                memo[ids] = node
            return node
        return compose_word(tape, self.c2w, list(ids))

    def _lookup_node(self, tape, word, rng, training):
        wid = self.vocab.encode(word, rng=rng, training=training,
                                singleton_prob=self.singleton_prob)
        return self.lookup.column_node(tape, wid)

    def node(self, tape, word, rng=None, training=False, memo=None):
        """Differentiable embedding of one token on the given tape.

        memo, when given, shares composition nodes for repeated character
        sequences within one recorded graph, so the output gradient of a
        repeated type accumulates at a single composition.
        """
        if not word:
            raise ValueError("cannot embed an empty token")
        if self.variant == LOOKUP:
            return self._lookup_node(tape, word, rng, training)
        if self.variant == C2W:
            return self._c2w_node(tape, word, rng, training, memo)
        c2w_node = self._c2w_node(tape, word, rng, training, memo)
        if self.apply_tanh:
            c2w_node = tanh(tape, c2w_node)
        return add(tape, c2w_node, self._lookup_node(tape, word, rng, training))

    def vector(self, word):
        """Forward-only embedding of one token with a frozen model."""
        if self.variant == LOOKUP:
            return self.lookup.vector(self.vocab.lookup(word))
        char_ids = self.charset.encode_word(word)
        if self.cache is not None:
            vec = cache_get_or_compose(self.cache, self.c2w, word, char_ids)
        else:
            vec = compose_word(Tape(record=False), self.c2w, char_ids).value
        if self.variant == C2W:
            return vec
        if self.apply_tanh:
            vec = np.tanh(vec)
        return vec + self.lookup.vector(self.vocab.lookup(word))


def make_embedder(variant, d, d_char, d_char_state, vocab, charset, init,
                  apply_tanh=False, singleton_prob=0.5):
    """Construct a fresh embedder; parameter creation order is fixed:
    C2W block (char table, forward LSTM, backward LSTM, combiners) first,
    then the word lookup table."""
    c2w = None
    lookup = None
    if variant in (C2W, COMBINED):
        c2w = C2WParams(len(charset), d_char, d_char_state, d, init)
    if variant in (LOOKUP, COMBINED):
        lookup = WordLookupTable(vocab, d, init)
    return Embedder(variant, d, c2w=c2w, lookup=lookup, vocab=vocab,
                    charset=charset, apply_tanh=apply_tanh,
                    singleton_prob=singleton_prob)


def lookup_word(table, word_id):
    """Column word_id of the lookup table as a plain vector."""
    return table.vector(word_id)


# ---------------------------------------------------------------------------
# parameter accounting

def c2w_composition_count(d_char, d_char_state, d_out):
    """Closed-form size of the composition block (character table excluded):
    two LSTM directions with full-matrix peepholes plus the combiners.

    per direction: 3*(d_cs*d_c + d_cs^2 + d_cs^2 + d_cs)  [i, f, o gates]
                   + (d_cs*d_c + d_cs^2 + d_cs)           [candidate]
    combiners:     2*d*d_cs + d
    """
    d_c, d_cs = d_char, d_char_state
    gate = d_cs * d_c + d_cs * d_cs + d_cs * d_cs + d_cs
    cand = d_cs * d_c + d_cs * d_cs + d_cs
    per_direction = 3 * gate + cand
    return 2 * per_direction + 2 * d_out * d_cs + d_out


def count_parameters(obj):
    """Exact per-parameter sizes and total for anything with parameters()."""
    breakdown = {}
    for p in obj.parameters():
        breakdown[p.name] = p.size
    breakdown["total"] = sum(p.size for p in obj.parameters())
    return breakdown


# ---------------------------------------------------------------------------
# nearest neighbors

def nearest_neighbors(embedder, query, candidates, k):
    """Top-k candidates by cosine similarity to the query's embedding.

    The query itself is excluded; ties break lexicographically; zero-norm
    vectors are skipped and counted. Returns (ranked, skipped)."""
    if not candidates:
        raise ValueError("nearest_neighbors: empty candidate list")
    qv = embedder.vector(query)
    qn = np.linalg.norm(qv)
    skipped = 0
    scored = []
    for word in candidates:
        if word == query:
            continue
        v = embedder.vector(word)
        n = np.linalg.norm(v)
        if n == 0.0 or qn == 0.0:
            skipped += 1
            continue
        scored.append((word, float(np.dot(qv, v) / (qn * n))))
    scored.sort(key=lambda ws: (-ws[1], ws[0]))
    return scored[:k], skipped
