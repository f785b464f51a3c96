"""Text preprocessing, vocabularies, and the node-text file format."""

from __future__ import annotations

import string

import numpy as np

# Fixed English stopword list (classic Van Rijsbergen-style core set plus a
# handful of contractions' stems). Deliberately embedded so preprocessing is
# reproducible without external data.
STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been
before being below between both but by can cannot could did do does doing down
during each few for from further had has have having he her here hers herself
him himself his how i if in into is it its itself just me more most my myself
no nor not now of off on once only or other our ours ourselves out over own
same she should so some such than that the their theirs them themselves then
there these they this those through to too under until up very was we were
what when where which while who whom why will with you your yours yourself
yourselves
""".split())

_PUNCT_TABLE = str.maketrans({ch: " " for ch in string.punctuation})


def preprocess_text(raw: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace, drop stopwords.

    Deterministic and idempotent: re-running on the joined output yields the
    same token list. May return an empty list.
    """
    tokens = raw.lower().translate(_PUNCT_TABLE).split()
    return [t for t in tokens if t not in STOPWORDS]


class Vocabulary:
    """Word and character index maps with a reserved UNK entry in each.

    Index 0 is UNK in both maps; remaining indices are dense and assigned in
    first-appearance order over the corpus, so building twice from the same
    sequences gives identical maps.
    """

    UNK = "<unk>"

    def __init__(self, words: list[str], chars: list[str]):
        self.word_list = [self.UNK] + list(words)
        self.char_list = [self.UNK] + list(chars)
        self.words = {w: i for i, w in enumerate(self.word_list)}
        self.chars = {c: i for i, c in enumerate(self.char_list)}

    @property
    def n_words(self) -> int:
        return len(self.word_list)

    @property
    def n_chars(self) -> int:
        return len(self.char_list)

    def word_index(self, token: str) -> int:
        return self.words.get(token, 0)

    def char_indices(self, token: str) -> np.ndarray:
        return np.array([self.chars.get(c, 0) for c in token], dtype=np.int64)


def build_vocab(token_sequences, min_count: int = 1) -> Vocabulary:
    """Index every distinct token and character across the corpus.

    Tokens rarer than ``min_count`` are excluded from the word map and fall
    back to UNK at encode time (their characters are still indexed, so the
    character path keeps working for them).
    """
    counts: dict[str, int] = {}
    words: list[str] = []
    chars: list[str] = []
    char_seen: set[str] = set()
    for seq in token_sequences:
        for tok in seq:
            counts[tok] = counts.get(tok, 0) + 1
            if counts[tok] == 1:
                words.append(tok)
            for c in tok:
                if c not in char_seen:
                    char_seen.add(c)
                    chars.append(c)
    if min_count > 1:
        words = [w for w in words if counts[w] >= min_count]
    return Vocabulary(words, chars)


def load_node_texts(path) -> dict[str, str]:
    """Read a ``node_id<TAB>raw text`` file into an id -> raw-text map."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped or stripped.startswith("#"):
                continue
            if "\t" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected node_id<TAB>text")
            node_id, text = stripped.split("\t", 1)
            out[node_id] = text
    return out


def write_node_texts(path, texts: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for node_id, text in texts.items():
            fh.write(f"{node_id}\t{text}\n")
