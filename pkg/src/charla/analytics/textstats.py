"""Per-user linguistic features over logged user messages.

All lexicon matching is accent- and case-insensitive. POS tagging is a
closed-class lookup plus a suffix heuristic for verbs, which is adequate
for relative-frequency comparisons between user groups; it makes no claim
to parse quality.
"""

from __future__ import annotations

import math
import re
import string
from dataclasses import dataclass, field

from ..config import Config, fold

TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
SENTENCE_SPLIT_RE = re.compile(r"[.!?…]+")
PUNCTUATION = set(string.punctuation) | {"¡", "¿", "…"}

MTLD_THRESHOLD = 0.72

EMOJI_RANGES = ((0x1F000, 0x1FAFF), (0x2600, 0x27BF))

FEATURE_NAMES = [
    "char_count",
    "word_count",
    "sentence_count",
    "avg_word_len",
    "avg_sentence_len",
    "punctuation_rel_freq",
    "uppercase_ratio",
    "emoji_count",
    "simple_ttr",
    "root_ttr",
    "mtld",
    "pos_coord_conjunction",
    "pos_determiner",
    "pos_pronoun",
    "pos_verb",
    "pos_adjective",
    "pos_interjection",
    "pos_numeral",
    "pos_adposition",
    "polarity_positive",
    "polarity_negative",
    "polarity_neutral",
    "emotion_fear",
    "emotion_sadness",
    "emotion_others",
]


@dataclass
class AnalysisLexicons:
    """Folded lookup sets built once from the config lexicon sections."""

    coord_conjunction: frozenset[str]
    determiner: frozenset[str]
    pronoun: frozenset[str]
    adposition: frozenset[str]
    interjection: frozenset[str]
    adjective: frozenset[str]
    verb: frozenset[str]
    verb_suffixes: tuple[str, ...]
    numeral_words: frozenset[str]
    positive: frozenset[str]
    negative: frozenset[str]
    fear: frozenset[str]
    sadness: frozenset[str]
    others: frozenset[str]
    stopwords: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def from_config(cls, cfg: Config) -> "AnalysisLexicons":
        pos = cfg.raw["pos_lexicon"]
        senti = cfg.raw["sentiment_lexicon"]
        emo = cfg.raw["emotion_lexicon"]

        def folded(words: list[str]) -> frozenset[str]:
            return frozenset(fold(w) for w in words)

        return cls(
            coord_conjunction=folded(pos["coord_conjunction"]),
            determiner=folded(pos["determiner"]),
            pronoun=folded(pos["pronoun"]),
            adposition=folded(pos["adposition"]),
            interjection=folded(pos["interjection"]),
            adjective=folded(pos["adjective"]),
            verb=folded(pos["verb"]),
            verb_suffixes=tuple(fold(s) for s in pos["verb_suffixes"]),
            numeral_words=folded(pos["numeral_words"]),
            positive=folded(senti["positive"]),
            negative=folded(senti["negative"]),
            fear=folded(emo["fear"]),
            sadness=folded(emo["sadness"]),
            others=folded(emo["others"]),
            stopwords=folded(cfg.raw["stopwords"]),
        )


def tokenize(text: str) -> list[str]:
    """Folded word tokens: letters and digits, no underscores or symbols."""
    return [fold(t) for t in TOKEN_RE.findall(text)]


def sentence_count(text: str) -> int:
    parts = SENTENCE_SPLIT_RE.split(text)
    return sum(1 for p in parts if TOKEN_RE.search(p))


def emoji_count(text: str) -> int:
    total = 0
    for ch in text:
        code = ord(ch)
        if any(lo <= code <= hi for lo, hi in EMOJI_RANGES):
            total += 1
    return total


def simple_ttr(tokens: list[str]) -> float:
    return len(set(tokens)) / len(tokens) if tokens else 0.0


def root_ttr(tokens: list[str]) -> float:
    return len(set(tokens)) / math.sqrt(len(tokens)) if tokens else 0.0


def _mtld_pass(tokens: list[str]) -> float:
    factors = 0.0
    types: set[str] = set()
    count = 0
    for token in tokens:
        count += 1
        types.add(token)
        if len(types) / count < MTLD_THRESHOLD:
            factors += 1.0
            types.clear()
            count = 0
    if count > 0:
        ttr = len(types) / count
        factors += (1.0 - ttr) / (1.0 - MTLD_THRESHOLD)
    if factors == 0.0:
        return float(len(tokens))
    return len(tokens) / factors


def mtld(tokens: list[str]) -> float:
    """Mean length of sequential token runs keeping TTR above 0.72,
    averaged over a forward and a backward pass."""
    if not tokens:
        return 0.0
    return (_mtld_pass(tokens) + _mtld_pass(list(reversed(tokens)))) / 2.0


def pos_tag(token: str, lex: AnalysisLexicons) -> str | None:
    """Closed-class lookup with a verb-suffix fallback; first match wins."""
    if token in lex.coord_conjunction:
        return "coord_conjunction"
    if token in lex.determiner:
        return "determiner"
    if token in lex.adposition:
        return "adposition"
    if token in lex.pronoun:
        return "pronoun"
    if token in lex.interjection:
        return "interjection"
    if token.isdigit() or token in lex.numeral_words:
        return "numeral"
    if token in lex.verb:
        return "verb"
    if token in lex.adjective:
        return "adjective"
    for suffix in lex.verb_suffixes:
        if len(token) > len(suffix) and token.endswith(suffix):
            return "verb"
    return None


def extract_features(text: str, lex: AnalysisLexicons | None = None) -> dict[str, float]:
    """Feature vector for one user's aggregated text.

    Without lexicons only the volumetric, stylometric and diversity
    features are present; POS, polarity and emotion need word lists.
    """
    if not text.strip():
        raise ValueError("cannot extract features from empty text")
    tokens = tokenize(text)
    n = len(tokens)
    chars = len(text)
    sentences = sentence_count(text)
    alpha = sum(1 for ch in text if ch.isalpha())

    features: dict[str, float] = {
        "char_count": float(chars),
        "word_count": float(n),
        "sentence_count": float(sentences),
        "avg_word_len": sum(len(t) for t in tokens) / n if n else 0.0,
        "avg_sentence_len": n / sentences if sentences else 0.0,
        "punctuation_rel_freq": (
            sum(1 for ch in text if ch in PUNCTUATION) / chars if chars else 0.0
        ),
        "uppercase_ratio": (
            sum(1 for ch in text if ch.isupper()) / alpha if alpha else 0.0
        ),
        "emoji_count": float(emoji_count(text)),
        "simple_ttr": simple_ttr(tokens),
        "root_ttr": root_ttr(tokens),
        "mtld": mtld(tokens),
    }

    if lex is None:
        return features

    pos_counts = {
        name: 0
        for name in (
            "coord_conjunction",
            "determiner",
            "pronoun",
            "verb",
            "adjective",
            "interjection",
            "numeral",
            "adposition",
        )
    }
    positive = negative = 0
    fear = sadness = others = 0
    for token in tokens:
        tag = pos_tag(token, lex)
        if tag is not None:
            pos_counts[tag] += 1
        if token in lex.positive:
            positive += 1
        if token in lex.negative:
            negative += 1
        if token in lex.fear:
            fear += 1
        if token in lex.sadness:
            sadness += 1
        if token in lex.others:
            others += 1

    for name, count in pos_counts.items():
        features[f"pos_{name}"] = count / n if n else 0.0
    features["polarity_positive"] = positive / n if n else 0.0
    features["polarity_negative"] = negative / n if n else 0.0
    features["polarity_neutral"] = (n - positive - negative) / n if n else 0.0
    features["emotion_fear"] = fear / n if n else 0.0
    features["emotion_sadness"] = sadness / n if n else 0.0
    features["emotion_others"] = others / n if n else 0.0

    return features


def features_vector(features: dict[str, float]) -> list[float]:
    return [features[name] for name in FEATURE_NAMES]
