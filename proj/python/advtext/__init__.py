"""Python bindings of the adversarial text toolkit."""

import os as _os

# Installed wheels carry the lexicons next to the module.
_bundled = _os.path.join(_os.path.dirname(__file__), "data")
if _os.path.isdir(_bundled):
    _os.environ.setdefault("ADVTEXT_DATA", _bundled)

from ._advtext import (
    Alphabet,
    Classifier,
    Doc,
    Error,
    InvalidArgument,
    Lexicons,
    Perturbation,
    Service,
    Token,
    apply,
    attack,
    build_char_cnn,
    build_word_cnn,
    default_data_dir,
    deviations,
    edit_distance,
    evaluate,
    fingerprint,
    gen_probes,
    hot_phrases,
    hsps_black,
    load_checkpoint,
    load_dataset,
    load_lexicons,
    make_sentiment_corpus,
    make_topic_corpus,
    revert,
    save_checkpoint,
    tokenize,
)

__all__ = [
    "Alphabet",
    "Classifier",
    "Doc",
    "Error",
    "InvalidArgument",
    "Lexicons",
    "Perturbation",
    "Service",
    "Token",
    "apply",
    "attack",
    "build_char_cnn",
    "build_word_cnn",
    "default_data_dir",
    "deviations",
    "edit_distance",
    "evaluate",
    "fingerprint",
    "gen_probes",
    "hot_phrases",
    "hsps_black",
    "load_checkpoint",
    "load_dataset",
    "load_lexicons",
    "make_sentiment_corpus",
    "make_topic_corpus",
    "revert",
    "save_checkpoint",
    "tokenize",
]
