"""Corpus ingestion, vocabularies, unknown-token policies and batching."""

from dataclasses import dataclass

import numpy as np

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
UNK_CHAR = "␡"  # visible placeholder for the unknown-character sentinel


class CorpusError(ValueError):
    pass


@dataclass
class TaggedSentence:
    tokens: list
    tags: list

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise CorpusError("tags not parallel to tokens")
        if not self.tokens:
            raise CorpusError("empty sentence")


class Vocabulary:
    """Dense bidirectional string<->id map with frequencies and sentinels.

    Sentinels occupy the lowest ids in the order given; content items follow
    in the id order of `items`.
    """

    def __init__(self, items, lowercase=False, sentinels=(UNK,)):
        self.lowercase = lowercase
        self.sentinels = tuple(sentinels)
        self.itos = list(self.sentinels)
        self.freqs = [0] * len(self.sentinels)
        for word, freq in items:
            if lowercase and word != word.lower():
                raise CorpusError("lowercase vocabulary got %r" % word)
            self.itos.append(word)
            self.freqs.append(freq)
        self.stoi = {w: i for i, w in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise CorpusError("duplicate entries in vocabulary")
        self.unk_id = self.stoi.get(UNK)
        self.bos_id = self.stoi.get(BOS)
        self.eos_id = self.stoi.get(EOS)

    def __len__(self):
        return len(self.itos)

    def __contains__(self, word):
        return word in self.stoi

    def items(self):
        n = len(self.sentinels)
        return list(zip(self.itos[n:], self.freqs[n:]))

    def content_words(self):
        return self.itos[len(self.sentinels):]

    def word(self, wid):
        return self.itos[wid]

    def lookup(self, word):
        """Map a token to its id, with OOV falling back to the unknown id."""
        if self.lowercase:
            word = word.lower()
        wid = self.stoi.get(word)
        if wid is None:
            if self.unk_id is None:
                raise CorpusError("token %r not in closed vocabulary" % word)
            return self.unk_id
        return wid

    def encode(self, word, rng=None, training=False, singleton_prob=0.5):
        """lookup() plus the stochastic singleton-to-unknown training policy."""
        wid = self.lookup(word)
        if (training and self.unk_id is not None and wid != self.unk_id
                and self.freqs[wid] == 1 and rng.random() < singleton_prob):
            return self.unk_id
        return wid


class CharVocabulary:
    """Character-level map over Unicode scalars with an unknown sentinel."""

    def __init__(self, items):
        self.itos = [UNK_CHAR]
        self.freqs = [0]
        for ch, freq in items:
            self.itos.append(ch)
            self.freqs.append(freq)
        self.stoi = {c: i for i, c in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise CorpusError("duplicate characters in charset")
        self.unk_id = 0

    def __len__(self):
        return len(self.itos)

    def items(self):
        return list(zip(self.itos[1:], self.freqs[1:]))

    def encode_word(self, word, rng=None, training=False, singleton_prob=0.5):
        """Character ids for a word, case preserved; unseen chars map to the
        unknown sentinel, training singleton chars stochastically too."""
        ids = []
        for ch in word:
            cid = self.stoi.get(ch, self.unk_id)
            if (training and cid != self.unk_id and self.freqs[cid] == 1
                    and rng.random() < singleton_prob):
                cid = self.unk_id
            ids.append(cid)
        return ids


def read_plaintext(path):
    """One whitespace-tokenized sentence per line; returns (sentences, skipped).

    skipped counts blank lines. Undecodable bytes raise with the line number.
    """
    sentences = []
    skipped = 0
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CorpusError("%s:%d: undecodable bytes (%s)"
                                  % (path, lineno, exc)) from None
            tokens = line.split()
            if not tokens:
                skipped += 1
                continue
            sentences.append(tokens)
    return sentences, skipped


def read_conll(path, word_col=1, tag_col=4):
    """Tab-separated rows, blank-line sentence breaks, '#' comments skipped."""
    sentences = []
    tokens, tags = [], []
    need = max(word_col, tag_col) + 1
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8").rstrip("\r\n")
            except UnicodeDecodeError as exc:
                raise CorpusError("%s:%d: undecodable bytes (%s)"
                                  % (path, lineno, exc)) from None
            if line.startswith("#"):
                continue
            if not line.strip():
                if tokens:
                    sentences.append(TaggedSentence(tokens, tags))
                    tokens, tags = [], []
                continue
            cols = line.split("\t")
            if len(cols) < need:
                raise CorpusError("%s:%d: expected at least %d columns, got %d"
                                  % (path, lineno, need, len(cols)))
            tokens.append(cols[word_col])
            tags.append(cols[tag_col])
    if tokens:
        sentences.append(TaggedSentence(tokens, tags))
    return sentences


def write_tagged(path, sentences):
    """token<TAB>tag lines, blank line between sentences."""
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            for tok, tag in zip(sent.tokens, sent.tags):
                fh.write("%s\t%s\n" % (tok, tag))
            fh.write("\n")


def _count_tokens(sentences, lowercase):
    counts = {}
    for sent in sentences:
        for tok in sent:
            if lowercase:
                tok = tok.lower()
            counts[tok] = counts.get(tok, 0) + 1
    return counts


def build_vocab(sentences, max_size=None, lowercase=False, sentinels=(UNK,)):
    """Keep the max_size most frequent types (freq desc, then lexicographic)."""
    if not sentences:
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    counts = _count_tokens(sentences, lowercase)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if max_size is not None:
        ranked = ranked[:max_size]
    return Vocabulary(ranked, lowercase=lowercase, sentinels=sentinels)


def build_charset(sentences):
    """Every Unicode scalar appearing in any token; whitespace never enters."""
    if not sentences:
        raise CorpusError("cannot build a charset from an empty corpus")
    counts = {}
    for sent in sentences:
        for tok in sent:
            for ch in tok:
                counts[ch] = counts.get(ch, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return CharVocabulary(ranked)


def build_tagset(tagged_sentences):
    """Closed tag vocabulary, no unknown sentinel; ids in sorted tag order."""
    tags = sorted({t for sent in tagged_sentences for t in sent.tags})
    return Vocabulary([(t, 0) for t in tags], sentinels=())


def apply_unk_policy(tokens, vocab, rng=None, training=False, singleton_prob=0.5):
    """Token ids under the unknown policy: frequency-0 types always map to
    the unknown id; in training, frequency-1 types do so with singleton_prob."""
    return [vocab.encode(t, rng=rng, training=training,
                         singleton_prob=singleton_prob) for t in tokens]


def make_batches(sentences, batch_size, rng):
    """Seeded shuffle, then consecutive groups; final partial batch kept."""
    if not sentences:
        raise CorpusError("cannot batch an empty corpus")
    order = rng.permutation(len(sentences))
    shuffled = [sentences[i] for i in order]
    return [shuffled[i:i + batch_size]
            for i in range(0, len(shuffled), batch_size)]
