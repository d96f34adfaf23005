"""Character-composed word embeddings with an LSTM language model and a
Bi-LSTM part-of-speech tagger, on a minimal tape-based autodiff core."""

from .autodiff import (Parameter, Tape, backward, finite_difference_check,
                       sgd_momentum_step)
from .embeddings import (C2WParams, Embedder, EmbeddingCache, WordLookupTable,
                         compose_word, count_parameters, make_embedder,
                         nearest_neighbors)
from .langmodel import LmConfig, LmModel, perplexity, train_lm
from .persist import load_checkpoint, save_checkpoint
from .lstm import LstmParams, lstm_forward, lstm_step
from .tagger import TaggerConfig, TaggerModel, tag_sentence, tagging_accuracy, train_tagger

__all__ = [
    "Parameter", "Tape", "backward", "finite_difference_check",
    "sgd_momentum_step",
    "C2WParams", "Embedder", "EmbeddingCache", "WordLookupTable",
    "compose_word", "count_parameters", "make_embedder", "nearest_neighbors",
    "LmConfig", "LmModel", "perplexity", "train_lm",
    "load_checkpoint", "save_checkpoint",
    "LstmParams", "lstm_forward", "lstm_step",
    "TaggerConfig", "TaggerModel", "tag_sentence", "tagging_accuracy",
    "train_tagger",
]

__version__ = "0.1.0"
