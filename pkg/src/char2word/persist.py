"""Checkpoint serialization (text manifest + little-endian float64 blob)
and pretrained-embedding import."""

import json
import os

import numpy as np

from . import corpus as corpus_mod
from . import embeddings as emb_mod
from .autodiff import zeros_init
from .corpus import CharVocabulary, Vocabulary
from .langmodel import LmConfig, build_lm_model
from .tagger import TaggerConfig, build_tagger_model

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


class PretrainedFormatError(ValueError):
    pass


def _vocab_payload(vocab):
    if vocab is None:
        return None
    return {"lowercase": vocab.lowercase,
            "sentinels": list(vocab.sentinels),
            "items": [[w, f] for w, f in vocab.items()]}


def _vocab_from_payload(payload):
    if payload is None:
        return None
    return Vocabulary([(w, f) for w, f in payload["items"]],
                      lowercase=payload["lowercase"],
                      sentinels=tuple(payload["sentinels"]))


def _charset_payload(charset):
    if charset is None:
        return None
    return {"items": [[c, f] for c, f in charset.items()]}


def _charset_from_payload(payload):
    if payload is None:
        return None
    return CharVocabulary([(c, f) for c, f in payload["items"]])


def build_manifest(model):
    registry = []
    offset = 0
    for p in model.parameters():
        registry.append({"name": p.name,
                         "shape": list(p.value.shape),
                         "offset": offset})
        offset += 8 * p.size
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "config": model.config_dict(),
        "word_vocab": _vocab_payload(model.embedder.vocab),
        "charset": _charset_payload(model.embedder.charset),
        "registry": registry,
        "blob_bytes": offset,
    }
    if model.kind == "lm":
        manifest["out_vocab"] = _vocab_payload(model.out_vocab)
    else:
        manifest["tagset"] = model.tagset.itos
    if model.dev_metric is not None:
        manifest["dev_metric"] = model.dev_metric
        manifest["best_epoch"] = model.best_epoch
    return manifest


def save_checkpoint(model, path):
    """Write path.manifest (UTF-8 JSON) and path.blob (little-endian float64,
    row-major, registry order) atomically; no partial files on failure."""
    for p in model.parameters():
        if not np.all(np.isfinite(p.value)):
            raise CheckpointError("non-finite values in %s" % p.name)
    manifest = build_manifest(model)
    manifest_text = json.dumps(manifest, ensure_ascii=False, sort_keys=True,
                               indent=1)
    blob = b"".join(np.ascontiguousarray(p.value, dtype="<f8").tobytes()
                    for p in model.parameters())
    tmp_manifest = path + ".manifest.tmp"
    tmp_blob = path + ".blob.tmp"
    try:
        with open(tmp_manifest, "w", encoding="utf-8") as fh:
            fh.write(manifest_text)
        with open(tmp_blob, "wb") as fh:
            fh.write(blob)
        os.replace(tmp_manifest, path + ".manifest")
        os.replace(tmp_blob, path + ".blob")
    except OSError:
        for tmp in (tmp_manifest, tmp_blob):
            if os.path.exists(tmp):
                os.remove(tmp)
        raise


def _rebuild_model(manifest):
    word_vocab = _vocab_from_payload(manifest["word_vocab"])
    charset = _charset_from_payload(manifest["charset"])
    if manifest["kind"] == "lm":
        cfg = LmConfig(**manifest["config"])
        out_vocab = _vocab_from_payload(manifest["out_vocab"])
        model = build_lm_model(cfg, word_vocab, charset, out_vocab, zeros_init)
    elif manifest["kind"] == "tagger":
        cfg = TaggerConfig(**manifest["config"])
        tagset = Vocabulary([(t, 0) for t in manifest["tagset"]], sentinels=())
        model = build_tagger_model(cfg, word_vocab, charset, tagset, zeros_init)
    else:
        raise CheckpointError("unknown model kind %r" % manifest["kind"])
    model.dev_metric = manifest.get("dev_metric")
    model.best_epoch = manifest.get("best_epoch")
    return model


def load_checkpoint(path):
    """Reconstruct a model from path.manifest/path.blob with validation."""
    with open(path + ".manifest", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError("unsupported checkpoint format version %r"
                              % version)
    model = _rebuild_model(manifest)
    with open(path + ".blob", "rb") as fh:
        blob = fh.read()
    registry = manifest["registry"]
    params = model.parameters()
    if len(registry) != len(params):
        raise CheckpointError("registry lists %d parameters, model has %d"
                              % (len(registry), len(params)))
    for entry, p in zip(registry, params):
        if entry["name"] != p.name:
            raise CheckpointError("registry entry %r does not match model "
                                  "parameter %r" % (entry["name"], p.name))
        shape = tuple(entry["shape"])
        if shape != p.value.shape:
            raise CheckpointError("shape mismatch for %s: manifest %s, "
                                  "model %s" % (p.name, shape, p.value.shape))
        start = entry["offset"]
        end = start + 8 * p.size
        if end > len(blob):
            raise CheckpointError("blob too short for %s" % p.name)
        values = np.frombuffer(blob[start:end], dtype="<f8").reshape(shape)
        if not np.all(np.isfinite(values)):
            raise CheckpointError("non-finite values in %s" % p.name)
        p.value[...] = values
    expected = manifest.get("blob_bytes")
    if expected is not None and expected != len(blob):
        raise CheckpointError("blob size mismatch: manifest says %d bytes, "
                              "file has %d" % (expected, len(blob)))
    return model


def load_pretrained_embeddings(path, vocab, d, rng):
    """Word2vec-style text vectors: header '<count> <dim>', then one word and
    dim reals per line. Missing vocabulary words get uniform [-0.1, 0.1]
    columns. Returns (WordLookupTable, coverage stats)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise PretrainedFormatError("%s:1: malformed header" % path)
        _, dim = int(header[0]), int(header[1])
        if dim != d:
            raise PretrainedFormatError(
                "pretrained dimension %d does not match model dimension %d"
                % (dim, d))
        vectors = {}
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise PretrainedFormatError(
                    "%s:%d: expected a word and %d values, got %d fields"
                    % (path, lineno, dim, len(parts)))
            try:
                vectors[parts[0]] = np.array([float(v) for v in parts[1:]])
            except ValueError:
                raise PretrainedFormatError(
                    "%s:%d: non-numeric value" % (path, lineno)) from None
    table = emb_mod.WordLookupTable(
        vocab, d, lambda shape: rng.uniform(-0.1, 0.1, size=shape))
    loaded = 0
    for wid, word in enumerate(vocab.itos):
        vec = vectors.get(word)
        if vec is not None:
            table.P.value[:, wid] = vec
            loaded += 1
    stats = {"file_words": len(vectors), "loaded": loaded,
             "random": len(vocab) - loaded}
    return table, stats
