"""Metric correctness against hand-computed values and brute-force oracles.

Every expected BLEU/ROUGE value below was derived by hand from the
definitions (clipped counts written out case by case); the expressions
keep the arithmetic visible.  CIDEr-D and the simplified METEOR are
checked against independent dense/brute-force implementations.
"""

import math

import numpy as np
import pytest

from hear.metrics import (bleu_n, cider_d, exact_match, meteor_simple,
                          rouge_l, sentence_scores)

from .oracles import (bleu_oracle, cider_d_oracle, meteor_simple_oracle,
                      rouge_l_oracle)


def F(p, r, b2=1.44):
    """ROUGE F-measure from max precision and max recall."""
    return (1 + b2) * p * r / (r + b2 * p)


E = math.exp

# (candidate, references, [bleu1..bleu4], rouge_l)
HAND_CASES = [
    # 1: identity
    ("the cat sat on the mat", ["the cat sat on the mat"],
     [1.0, 1.0, 1.0, 1.0], 1.0),
    # 2: repeated token vs short reference (clipping + long candidate)
    ("the the the", ["the cat"],
     [1 / 3, 0.0, 0.0, 0.0], F(1 / 3, 1 / 2)),
    # 3: disjoint vocabularies
    ("a b c", ["x y z"], [0.0, 0.0, 0.0, 0.0], 0.0),
    # 4: one dropped word
    ("a b c d", ["a c d"],
     [3 / 4, math.sqrt((3 / 4) * (1 / 3)), 0.0, 0.0], F(3 / 4, 1.0)),
    # 5: short candidate (brevity penalty active)
    ("a c d", ["a b c d"],
     [E(1 - 4 / 3), E(1 - 4 / 3) * math.sqrt(1 / 2), 0.0, 0.0],
     F(1.0, 3 / 4)),
    # 6: multi-reference, closest-length reference is the second
    ("a b", ["a x y z", "a b c"],
     [E(1 - 3 / 2), E(1 - 3 / 2), 0.0, 0.0], F(1.0, 2 / 3)),
    # 7: closest-length tie resolves to the shorter reference
    ("a b c", ["a b", "a b c d"],
     [1.0, 1.0, 1.0, 0.0], F(1.0, 1.0)),
    # 8: count clipping with duplicates
    ("cat cat cat dog", ["cat cat dog"],
     [3 / 4, math.sqrt((3 / 4) * (2 / 3)),
      ((3 / 4) * (2 / 3) * (1 / 2)) ** (1 / 3), 0.0], F(3 / 4, 1.0)),
    # 9: single identical token
    ("yes", ["yes"], [1.0, 0.0, 0.0, 0.0], 1.0),
    # 10: single differing token
    ("yes", ["no"], [0.0, 0.0, 0.0, 0.0], 0.0),
    # 11: candidate one word longer
    ("the quick brown fox jumps", ["the quick brown fox"],
     [4 / 5, math.sqrt((4 / 5) * (3 / 4)),
      ((4 / 5) * (3 / 4) * (2 / 3)) ** (1 / 3),
      ((4 / 5) * (3 / 4) * (2 / 3) * (1 / 2)) ** (1 / 4)],
     F(4 / 5, 1.0)),
    # 12: exact reversal (unigrams survive, order dies)
    ("fox brown quick the", ["the quick brown fox"],
     [1.0, 0.0, 0.0, 0.0], 1 / 4),
    # 13: empty candidate
    ("", ["a b"], [0.0, 0.0, 0.0, 0.0], 0.0),
    # 14: second reference matches exactly
    ("b a", ["a b", "b a"], [1.0, 1.0, 0.0, 0.0], 1.0),
    # 15: one-word candidate against a three-word reference
    ("a", ["a b c"], [E(1 - 3), 0.0, 0.0, 0.0], F(1.0, 1 / 3)),
    # 16: duplicate tail token
    ("a b c c", ["a b c"],
     [3 / 4, math.sqrt((3 / 4) * (2 / 3)),
      ((3 / 4) * (2 / 3) * (1 / 2)) ** (1 / 3), 0.0], F(3 / 4, 1.0)),
    # 17: bag identical, order partly survives
    ("a b a b", ["a b b a"],
     [1.0, math.sqrt(2 / 3), 0.0, 0.0], F(3 / 4, 3 / 4)),
    # 18: doubled bigram clipped to one
    ("the cat the cat", ["the cat"],
     [1 / 2, math.sqrt((1 / 2) * (1 / 3)), 0.0, 0.0], F(1 / 2, 1.0)),
    # 19: one substitution mid-sentence
    ("1 2 3 4 5 6", ["1 2 3 9 5 6"],
     [5 / 6, math.sqrt((5 / 6) * (3 / 5)),
      ((5 / 6) * (3 / 5) * (1 / 4)) ** (1 / 3), 0.0], F(5 / 6, 5 / 6)),
    # 20: clipping limits taken per reference, union across references
    ("a a b", ["a b", "a a"], [1.0, 1.0, 0.0, 0.0], F(2 / 3, 1.0)),
]


@pytest.mark.parametrize("case_idx", range(len(HAND_CASES)))
def test_bleu_hand_suite(case_idx):
    cand, refs, expected, _ = HAND_CASES[case_idx]
    for n in range(1, 5):
        got = bleu_n(cand, refs, n)
        assert abs(got - expected[n - 1]) < 1e-9, (
            f"case {case_idx + 1} BLEU-{n}: {got} != {expected[n - 1]}")


@pytest.mark.parametrize("case_idx", range(len(HAND_CASES)))
def test_rouge_hand_suite(case_idx):
    cand, refs, _, expected = HAND_CASES[case_idx]
    assert abs(rouge_l(cand, refs) - expected) < 1e-9


@pytest.mark.parametrize("case_idx", range(len(HAND_CASES)))
def test_hand_suite_agrees_with_brute_force(case_idx):
    cand, refs, _, _ = HAND_CASES[case_idx]
    for n in range(1, 5):
        assert abs(bleu_n(cand, refs, n) - bleu_oracle(cand, refs, n)) < 1e-12
    assert abs(rouge_l(cand, refs) - rouge_l_oracle(cand, refs)) < 1e-12


def test_rouge_one_dropped_word_value():
    # P=3/4, R=1: (1+1.44)*0.75/(1+1.44*0.75) = 1.83/2.08
    assert abs(rouge_l("a b c d", ["a c d"]) - 1.83 / 2.08) < 1e-12
    assert abs(1.83 / 2.08 - 0.8798076923076923) < 1e-15


def test_bleu_rejects_no_references():
    with pytest.raises(ValueError):
        bleu_n("a", [], 1)


def _random_sentences(rng, vocab, max_len=8):
    n = int(rng.integers(1, max_len + 1))
    return " ".join(rng.choice(vocab, size=n))


# ---------------------------------------------------------------------------
# CIDEr-D
# ---------------------------------------------------------------------------


def test_cider_identity_two_instance_corpus_matches_oracle():
    cands = ["a man is cooking", "a dog runs outside"]
    refs = [["a man is cooking"], ["someone walks a dog"]]
    per, corpus = cider_d(cands, refs)
    oracle = cider_d_oracle(cands, refs)
    np.testing.assert_allclose(per, oracle, atol=1e-6)
    assert abs(corpus - float(np.mean(oracle))) < 1e-9
    assert per[0] > per[1]  # identity scores above a partial match


def test_cider_no_overlap_is_zero():
    cands = ["x y z", "a man is cooking"]
    refs = [["completely different words"], ["a man is cooking"]]
    per, _ = cider_d(cands, refs)
    assert per[0] == 0.0


def test_cider_duplication_leaves_scores_unchanged():
    rng = np.random.default_rng(5)
    vocab = np.array("a b c d e f g h".split())
    cands = [_random_sentences(rng, vocab) for _ in range(6)]
    refs = [[_random_sentences(rng, vocab)] for _ in range(6)]
    per, _ = cider_d(cands, refs)
    per_dup, _ = cider_d(cands * 2, refs * 2)
    np.testing.assert_allclose(per_dup[:6], per, atol=1e-9)
    np.testing.assert_allclose(per_dup[6:], per, atol=1e-9)


def test_cider_matches_oracle_on_random_corpora():
    vocab = np.array("the a dog cat runs sits sound music loud quiet".split())
    for seed in range(4):
        rng = np.random.default_rng(seed)
        cands = [_random_sentences(rng, vocab) for _ in range(8)]
        refs = [[_random_sentences(rng, vocab)
                 for _ in range(int(rng.integers(1, 4)))] for _ in range(8)]
        per, _ = cider_d(cands, refs)
        oracle = cider_d_oracle(cands, refs)
        np.testing.assert_allclose(per, oracle, atol=1e-6)


def test_cider_single_instance_corpus_permitted():
    per, corpus = cider_d(["a b"], [["a b"]])
    assert per == [0.0]  # every in-reference n-gram has zero idf
    assert corpus == 0.0


def test_cider_range_on_identity():
    # sentences need >= 4 tokens so every n-gram order is populated;
    # shorter identities score below the documented maximum of 10
    cands = ["a b c d", "e f g h"]
    refs = [["a b c d"], ["e f g h"]]
    per, _ = cider_d(cands, refs)
    for s in per:
        assert abs(s - 10.0) < 1e-9
    short, _ = cider_d(["a b c", "d e f"], [["a b c"], ["d e f"]])
    assert abs(short[0] - 7.5) < 1e-9  # the empty 4-gram order scores 0


# ---------------------------------------------------------------------------
# simplified METEOR
# ---------------------------------------------------------------------------


def test_meteor_identity_formula():
    # identical sentences: one chunk, penalty 0.5 / m^3, fmean 1
    for sentence in ("yes", "a b c", "the cat sat on the mat"):
        m = len(sentence.split())
        expected = 1.0 - 0.5 / m ** 3
        assert abs(meteor_simple(sentence, [sentence]) - expected) < 1e-12


def test_meteor_no_overlap_zero():
    assert meteor_simple("a b c", ["x y z"]) == 0.0
    assert meteor_simple("", ["x"]) == 0.0


def test_meteor_permutation_scores_below_identity():
    ref = ["the cat sat on the mat"]
    identity = meteor_simple("the cat sat on the mat", ref)
    permuted = meteor_simple("mat the on sat cat the", ref)
    assert permuted < identity


def test_meteor_stem_matching_hand_case():
    # exact stage matches nothing; stems pair play/plays only
    # m=1, P=1/2, R=1/2, fmean=10*0.25/5=0.5, penalty=0.5 -> 0.25
    got = meteor_simple("play running", ["plays run"])
    assert abs(got - 0.25) < 1e-12


def test_meteor_matches_oracle_on_random_corpora():
    vocab = np.array("play played playing run runs running cat cats "
                     "dog dogs the a".split())
    for seed in range(6):
        rng = np.random.default_rng(seed)
        for _ in range(25):
            cand = _random_sentences(rng, vocab)
            refs = [_random_sentences(rng, vocab)
                    for _ in range(int(rng.integers(1, 3)))]
            got = meteor_simple(cand, refs)
            want = meteor_simple_oracle(cand, refs)
            assert abs(got - want) < 1e-6


def test_meteor_multi_reference_takes_best():
    refs = ["x y z", "a b c"]
    assert meteor_simple("a b c", refs) == meteor_simple("a b c", ["a b c"])


# ---------------------------------------------------------------------------
# shared properties
# ---------------------------------------------------------------------------


def test_metrics_symmetric_in_reference_order():
    cand = "a b c d"
    refs = ["a c d", "b c", "a b c d e"]
    perm = [refs[2], refs[0], refs[1]]
    for n in range(1, 5):
        assert bleu_n(cand, refs, n) == bleu_n(cand, perm, n)
    assert rouge_l(cand, refs) == rouge_l(cand, perm)
    assert meteor_simple(cand, refs) == meteor_simple(cand, perm)


def test_metrics_bounded():
    rng = np.random.default_rng(17)
    vocab = np.array("a b c d e".split())
    for _ in range(50):
        cand = _random_sentences(rng, vocab)
        refs = [_random_sentences(rng, vocab)]
        for n in range(1, 5):
            assert 0.0 <= bleu_n(cand, refs, n) <= 1.0
        assert 0.0 <= rouge_l(cand, refs) <= 1.0
        assert 0.0 <= meteor_simple(cand, refs) <= 1.0


def test_exact_match():
    assert exact_match("a b", "a b") == 1.0
    assert exact_match("a b", "a c") == 0.0
    assert exact_match(["a", "b"], "a b") == 1.0


def test_sentence_scores_keys():
    out = sentence_scores("a b", ["a b"])
    assert set(out) == {"bleu_1", "bleu_2", "bleu_3", "bleu_4", "rouge_l",
                        "meteor_simple"}
