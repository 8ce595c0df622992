import numpy as np
import pytest
import torch

from hear.features import FeatureTrack
from hear.model import DlmConfig, DlmModel
from hear.synth import SynthCorpusConfig, synth_corpus
from hear.vocab import Vocabulary

torch.set_num_threads(1)


@pytest.fixture(scope="session")
def tiny_corpus():
    cfg = SynthCorpusConfig(clips=6, length=12, video_dim=10, audio_dim=4,
                            events=4, templates_per_clip=6, seed=11)
    corpus, labels = synth_corpus(cfg)
    return corpus, labels


def _model_config(corpus):
    return DlmConfig(vocab_size=len(corpus.vocab), audio_dim=4, video_dim=10,
                     d_model=16, n_heads=2, enc_layers=1, dec_layers=1,
                     max_len=128, max_answer_len=16, seed=5)


@pytest.fixture(scope="session")
def tiny_model(tiny_corpus):
    """Shared read-only model; tests that mutate parameters must use
    ``mutable_model`` instead."""
    corpus, _ = tiny_corpus
    return DlmModel(_model_config(corpus))


@pytest.fixture()
def mutable_model(tiny_corpus):
    corpus, _ = tiny_corpus
    return DlmModel(_model_config(corpus))


@pytest.fixture()
def small_track():
    rng = np.random.default_rng(3)
    return FeatureTrack(video=rng.normal(size=(9, 10)),
                        audio=rng.normal(size=(9, 4)))


@pytest.fixture(scope="session")
def word_vocab():
    vocab = Vocabulary()
    for w in ("does the video have sound ? yes no a cat sat on mat "
              "music is playing hear any sounds what color his hair").split():
        vocab.add(w)
    return vocab
