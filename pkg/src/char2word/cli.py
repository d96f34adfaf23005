"""Command-line entry points: training, evaluation, tagging, neighbor
queries, parameter accounting and the gradient self-check."""

import argparse
import sys

import numpy as np

from . import config as config_mod
from . import corpus as corpus_mod
from . import embeddings as emb_mod
from . import gradcheck as gradcheck_mod
from . import persist, report
from .config import ConfigError
from .langmodel import LmConfig, perplexity, train_lm
from .tagger import TaggerConfig, tag_sentence, tagging_accuracy, train_tagger

PARAM_COUNT_NOTE = (
    "note: commonly quoted ballpark totals of 150K-180K for this composition "
    "architecture come from a smaller counting rule; the exact enumerated "
    "count with full-matrix peephole connections is reported above.")


def _load_config(path, overrides, seed):
    cfg = config_mod.parse_config(config_mod.resolve_config_path(path))
    config_mod.apply_overrides(cfg, overrides or [])
    if seed is not None:
        cfg["seed"] = seed
    return cfg


def _lm_config(cfg):
    return LmConfig(
        embedder=cfg["embedder"], apply_tanh=cfg["apply_tanh"], d=cfg["d"],
        d_char=cfg["d_char"], d_char_state=cfg["d_char_state"],
        d_lm_state=cfg["d_lm_state"], lr=cfg["lr"], momentum=cfg["momentum"],
        batch_sentences=cfg["batch_sentences"],
        out_vocab_size=cfg["out_vocab_size"],
        input_vocab_size=cfg["input_vocab_size"],
        singleton_unk_prob=cfg["singleton_unk_prob"],
        cache_capacity=cfg["cache_capacity"],
        max_epochs=cfg["max_epochs"], seed=cfg["seed"])


def _tagger_config(cfg):
    return TaggerConfig(
        embedder=cfg["embedder"], apply_tanh=cfg["apply_tanh"], d=cfg["d"],
        d_char=cfg["d_char"], d_char_state=cfg["d_char_state"],
        d_word_state=cfg["d_word_state"], lr=cfg["lr"],
        momentum=cfg["momentum"], batch_sentences=cfg["batch_sentences"],
        input_vocab_size=cfg["input_vocab_size"],
        singleton_unk_prob=cfg["singleton_unk_prob"],
        cache_capacity=cfg["cache_capacity"],
        max_epochs=cfg["max_epochs"], seed=cfg["seed"])


def _pretrained_hook(cfg):
    path = cfg.get("pretrained")
    if not path:
        return None

    def hook(table):
        rng = np.random.default_rng(cfg["seed"] + 1)
        loaded, stats = persist.load_pretrained_embeddings(
            path, table.vocab, table.d, rng)
        table.P.value[...] = loaded.P.value
        print("pretrained embeddings: %d loaded, %d randomly initialized"
              % (stats["loaded"], stats["random"]))

    return hook


def _print_param_breakdown(model):
    breakdown = emb_mod.count_parameters(model)
    print("#Parameters")
    for name, count in breakdown.items():
        print("%s\t%d" % (name, count))
    if model.embedder.c2w is not None:
        c2w = model.embedder.c2w
        comp = emb_mod.c2w_composition_count(c2w.d_char, c2w.d_state,
                                             c2w.d_out)
        print("composition_block\t%d" % comp)
        print(PARAM_COUNT_NOTE)


def _write_reports(cfg, result, metric_label):
    log_path = cfg.get("log") or cfg["checkpoint"] + ".log.tsv"
    report.write_epoch_log(log_path, result.history)
    report.render_training_curves(result.history, log_path + ".png",
                                  metric_label)
    return log_path


def _attach_cache(model):
    emb = model.embedder
    if emb.c2w is not None and emb.vocab is not None:
        admissible = emb.vocab.content_words()[:model.cfg.cache_capacity]
        emb.cache = emb_mod.EmbeddingCache(model.cfg.cache_capacity,
                                           admissible)


def cmd_train_lm(args):
    cfg = _load_config(args.config, args.set, args.seed)
    config_mod.require(cfg, ("train", "dev", "checkpoint"), "train-lm")
    train_sents, skipped = corpus_mod.read_plaintext(cfg["train"])
    if skipped:
        print("skipped %d blank lines in %s" % (skipped, cfg["train"]))
    dev_sents, _ = corpus_mod.read_plaintext(cfg["dev"])
    result = train_lm(_lm_config(cfg), train_sents, dev_sents,
                      lookup_init_hook=_pretrained_hook(cfg))
    persist.save_checkpoint(result.model, cfg["checkpoint"])
    log_path = _write_reports(cfg, result, "dev perplexity")
    _print_param_breakdown(result.model)
    print("epoch log: %s" % log_path)
    print("best epoch: %d" % result.best_epoch)
    print("dev perplexity: %.2f" % result.best_metric)
    return 0


def cmd_train_tagger(args):
    cfg = _load_config(args.config, args.set, args.seed)
    config_mod.require(cfg, ("train", "dev", "checkpoint"), "train-tagger")
    train_sents = corpus_mod.read_conll(cfg["train"], cfg["word_col"],
                                        cfg["tag_col"])
    dev_sents = corpus_mod.read_conll(cfg["dev"], cfg["word_col"],
                                      cfg["tag_col"])
    result = train_tagger(_tagger_config(cfg), train_sents, dev_sents,
                          lookup_init_hook=_pretrained_hook(cfg))
    persist.save_checkpoint(result.model, cfg["checkpoint"])
    log_path = _write_reports(cfg, result, "dev accuracy")
    _print_param_breakdown(result.model)
    print("epoch log: %s" % log_path)
    print("best epoch: %d" % result.best_epoch)
    print("dev accuracy: %.2f" % (100.0 * result.best_metric))
    return 0


def cmd_eval(args):
    model = persist.load_checkpoint(args.checkpoint)
    _attach_cache(model)
    if args.metric == "ppl":
        if model.kind != "lm":
            print("error: metric 'ppl' needs a language-model checkpoint, "
                  "got kind %r" % model.kind, file=sys.stderr)
            return 2
        sentences, _ = corpus_mod.read_plaintext(args.corpus)
        print("perplexity: %.2f" % perplexity(model, sentences))
    else:
        if model.kind != "tagger":
            print("error: metric 'acc' needs a tagger checkpoint, got kind %r"
                  % model.kind, file=sys.stderr)
            return 2
        tagged = corpus_mod.read_conll(args.corpus, args.word_col,
                                       args.tag_col)
        print("accuracy: %.2f" % (100.0 * tagging_accuracy(model, tagged)))
    return 0


def cmd_tag(args):
    model = persist.load_checkpoint(args.checkpoint)
    if model.kind != "tagger":
        print("error: tag needs a tagger checkpoint, got kind %r"
              % model.kind, file=sys.stderr)
        return 2
    _attach_cache(model)
    sentences, _ = corpus_mod.read_plaintext(args.input)
    tagged = [corpus_mod.TaggedSentence(tokens, tag_sentence(model, tokens))
              for tokens in sentences]
    corpus_mod.write_tagged(args.output, tagged)
    return 0


def cmd_neighbors(args):
    model = persist.load_checkpoint(args.checkpoint)
    _attach_cache(model)
    candidates = model.embedder.vocab.content_words()
    for query in args.words:
        print("# neighbors of %s" % query)
        ranked, skipped = emb_mod.nearest_neighbors(model.embedder, query,
                                                    candidates, args.k)
        for word, cos in ranked:
            print("%s\t%.4f" % (word, cos))
        if skipped:
            print("# skipped %d zero-norm candidates" % skipped,
                  file=sys.stderr)
    return 0


def cmd_params(args):
    if args.checkpoint:
        model = persist.load_checkpoint(args.checkpoint)
        _print_param_breakdown(model)
        return 0
    print("#Parameters")
    print("word_lookup\t%d" % (args.vocab_size * args.dim))
    print("char_table\t%d" % (args.char_count * args.d_char))
    comp = emb_mod.c2w_composition_count(args.d_char, args.d_char_state,
                                         args.dim)
    print("composition_block\t%d" % comp)
    print("composition_total\t%d" % (comp + args.char_count * args.d_char))
    print(PARAM_COUNT_NOTE)
    return 0


def cmd_gradcheck(args):
    seed = args.seed if args.seed is not None else 0
    if args.config:
        cfg = _load_config(args.config, args.set, args.seed)
        seed = cfg["seed"]
    results = gradcheck_mod.run_gradcheck(seed=seed,
                                          corrupt_group=args.corrupt_group)
    worst = 0.0
    for suite in ("lm", "tagger"):
        for group, err in sorted(results[suite].items()):
            print("%s/%s\t%.3e" % (suite, group, err))
            worst = max(worst, err)
    if worst < gradcheck_mod.TOLERANCE:
        print("gradcheck PASS (max relative error %.3e)" % worst)
        return 0
    print("gradcheck FAIL (max relative error %.3e)" % worst)
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="char2word",
        description="Character-composed word embeddings with an LSTM "
                    "language model and a Bi-LSTM part-of-speech tagger.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_command(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="run configuration file (key = value)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.set_defaults(fn=fn)
        return p

    add_config_command("train-lm", cmd_train_lm,
                       "train a language model and save the best checkpoint")
    add_config_command("train-tagger", cmd_train_tagger,
                       "train a part-of-speech tagger")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a corpus")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--metric", required=True, choices=("ppl", "acc"))
    p.add_argument("--word-col", type=int, default=1)
    p.add_argument("--tag-col", type=int, default=4)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("tag", help="tag plain-text sentences")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True,
                   help="plain text, one sentence per line")
    p.add_argument("--output", required=True,
                   help="token<TAB>tag lines, blank line between sentences")
    p.set_defaults(fn=cmd_tag)

    p = sub.add_parser("neighbors",
                       help="nearest in-vocabulary words by cosine")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("words", nargs="+")
    p.set_defaults(fn=cmd_neighbors)

    p = sub.add_parser("params", help="exact parameter-count breakdown")
    p.add_argument("--checkpoint")
    p.add_argument("--vocab-size", type=int, default=80000)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--char-count", type=int, default=618)
    p.add_argument("--d-char", type=int, default=50)
    p.add_argument("--d-char-state", type=int, default=150)
    p.set_defaults(fn=cmd_params)

    p = sub.add_parser("gradcheck",
                       help="finite-difference check of all gradients")
    p.add_argument("config", nargs="?",
                   help="optional config file (only the seed is used)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("--corrupt-group", help=argparse.SUPPRESS)
    p.set_defaults(fn=cmd_gradcheck)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, corpus_mod.CorpusError, persist.CheckpointError,
            persist.PretrainedFormatError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
