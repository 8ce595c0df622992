import pytest

from hear.data import Corpus, DialogueInstance, build_history


def _inst(clip="c1", rnd=1):
    return DialogueInstance(clip_id=clip, caption=[7], history=[],
                            question=[8, 9], answer=[10], round=rnd)


def test_build_history_truncates_to_window():
    pairs = [([1], [2]), ([3], [4]), ([5], [6]), ([7], [8])]
    out = build_history(pairs, window=3)
    assert out == [([3], [4]), ([5], [6]), ([7], [8])]


def test_build_history_copies_lists():
    q, a = [1, 2], [3]
    out = build_history([(q, a)], window=3)
    out[0][0].append(99)
    assert q == [1, 2]


def test_build_history_zero_window():
    assert build_history([([1], [2])], window=0) == []


def test_build_history_negative_window_rejected():
    with pytest.raises(ValueError):
        build_history([], window=-1)


def test_instance_round_validated():
    with pytest.raises(ValueError):
        _inst(rnd=0)


def test_corpus_lookup_and_subset(tiny_corpus):
    corpus, _ = tiny_corpus
    ids = corpus.clip_ids
    assert len(ids) == len(corpus)
    track = corpus.track_for(ids[0])
    assert track.length == 12
    with pytest.raises(KeyError):
        corpus.track_for("missing")

    sub = corpus.subset(ids[:2])
    assert sub.clip_ids == ids[:2]
    assert len(sub.instances) == 12  # 2 clips x 6 rounds
    assert sub.vocab is corpus.vocab


def test_question_texts_round_trip(tiny_corpus):
    corpus, _ = tiny_corpus
    texts = corpus.question_texts()
    assert len(texts) == len(corpus.instances)
    assert all(t == i.meta["question_text"]
               for t, i in zip(texts, corpus.instances))
