"""Word-level pairing lifted from the token-level assignment.

Each token match votes to pair its source word with the matched token's back
word. A word follows the majority vote among its tokens, ties broken by the
single highest-similarity token match; conflicting claims on one back word are
resolved by descending representative similarity, then ascending source index,
and the losing source word becomes missing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import CostMatrix, similarity_matrix, solve_lsap
from .corpus import EmbeddingTable, TokenizedSentence


@dataclass(frozen=True)
class WordPairing:
    """Matched word index pairs plus the unmatched leftovers on either side."""

    pairs: tuple[tuple[int, int, float], ...]
    missing_src: tuple[int, ...]
    extra_back: tuple[int, ...]


def _token_to_word(sentence: TokenizedSentence) -> np.ndarray:
    mapping = np.empty(sentence.num_tokens, dtype=np.int64)
    for wi, word in enumerate(sentence.words):
        for t in word.token_indices:
            mapping[t] = wi
    return mapping


def align_words(src: TokenizedSentence, back: TokenizedSentence,
                src_emb: EmbeddingTable, back_emb: EmbeddingTable) -> WordPairing:
    """Pair words between a sentence and its back-translation."""
    if len(src_emb) != src.num_tokens or len(back_emb) != back.num_tokens:
        raise ValueError("embedding tables do not match sentence token counts")
    sim = similarity_matrix(src_emb, back_emb)
    assignment = solve_lsap(CostMatrix(np.clip(1.0 - sim, 0.0, 2.0)))

    src_word_of = _token_to_word(src)
    back_word_of = _token_to_word(back)

    # votes[src word][back word] = [vote count, best similarity among votes]
    votes: dict[int, dict[int, list]] = {}
    for ti, tj in assignment.matches:
        ws = int(src_word_of[ti])
        wb = int(back_word_of[tj])
        entry = votes.setdefault(ws, {}).setdefault(wb, [0, -2.0])
        entry[0] += 1
        entry[1] = max(entry[1], float(sim[ti, tj]))

    candidates = []
    for ws, ballots in votes.items():
        wb = max(ballots, key=lambda b: (ballots[b][0], ballots[b][1], -b))
        candidates.append((ws, wb, ballots[wb][1]))

    taken: set[int] = set()
    pairs = []
    missing = [ws for ws in range(len(src.words)) if ws not in votes]
    for ws, wb, rep in sorted(candidates, key=lambda c: (-c[2], c[0])):
        if wb in taken:
            missing.append(ws)
        else:
            taken.add(wb)
            pairs.append((ws, wb, rep))

    extra = [wb for wb in range(len(back.words)) if wb not in taken]
    return WordPairing(
        pairs=tuple(sorted(pairs)),
        missing_src=tuple(sorted(missing)),
        extra_back=tuple(sorted(extra)),
    )


def render_pairing(src: TokenizedSentence, back: TokenizedSentence,
                   pairing: WordPairing) -> str:
    """Debug view: one tab-separated line per pair, then MISSING/EXTRA lines."""
    lines = []
    for ws, wb, rep in pairing.pairs:
        lines.append(f"{src.words[ws].surface}\t↔\t{back.words[wb].surface}\t{rep:.6f}")
    for ws in pairing.missing_src:
        lines.append(f"MISSING\t{src.words[ws].surface}")
    for wb in pairing.extra_back:
        lines.append(f"EXTRA\t{back.words[wb].surface}")
    return "\n".join(lines)
