"""Desk-scale video-grounded dialogue with hearing-enhanced training.

The package trains a compact encoder-decoder dialogue model over aligned
audio/video feature tracks and dialogue text.  Two mechanisms make the
model actually listen:

* sensible audio listening: question-conditioned gating of the audio and
  video streams, driven by an audio-keyword check or a learned
  relatedness score, and
* reconstructive listening enhancement: masked-audio regression with a
  ranking bound against a context-deprived reconstruction, narrowed over
  epochs by a masking-distance curriculum.

Entry points: the ``hear`` CLI (see ``hear.cli``), the HTTP session
service (``hear.service``) and the sklearn-style wrappers
``AudioRelatednessEstimator`` and ``HearDialogue``.
"""

from hear.features import FeatureTrack, load_feature_track, read_hearfeat, write_hearfeat
from hear.vocab import Vocabulary, build_vocab, tokenize
from hear.data import DialogueInstance, build_history
from hear.keywords import AUDIO_KEYWORDS, KeywordSet, contains_audio_keyword
from hear.synth import SynthCorpusConfig, synth_corpus
from hear.avsd import load_avsd
from hear.model import DlmConfig, DlmModel, dlm_loss
from hear.gating import RelatednessDecision, calibrated_fuse, keyword_gate_fuse, sal_loss
from hear.masking import MaskPlan, apply_audio_mask, apply_surrounding_mask, sample_mask
from hear.schedule import ScheduleConfig, mask_distance_schedule
from hear.rle import audio_recon_loss, rle_loss, rub_loss, upper_bound_loss
from hear.estimator import AudioRelatednessEstimator, build_estimator_labels
from hear.decoding import DecodeConfig, beam_decode, greedy_decode
from hear.training import HearDialogue, TrainConfig, lr_at, train
from hear.evaluation import EvalReport, evaluate, keyword_proportions
from hear import metrics

__version__ = "0.1.0"

__all__ = [
    "AUDIO_KEYWORDS",
    "AudioRelatednessEstimator",
    "DecodeConfig",
    "DialogueInstance",
    "DlmConfig",
    "DlmModel",
    "EvalReport",
    "FeatureTrack",
    "HearDialogue",
    "KeywordSet",
    "MaskPlan",
    "RelatednessDecision",
    "ScheduleConfig",
    "SynthCorpusConfig",
    "TrainConfig",
    "Vocabulary",
    "apply_audio_mask",
    "apply_surrounding_mask",
    "audio_recon_loss",
    "beam_decode",
    "build_estimator_labels",
    "build_history",
    "build_vocab",
    "calibrated_fuse",
    "contains_audio_keyword",
    "dlm_loss",
    "evaluate",
    "greedy_decode",
    "keyword_gate_fuse",
    "keyword_proportions",
    "load_avsd",
    "load_feature_track",
    "lr_at",
    "mask_distance_schedule",
    "metrics",
    "read_hearfeat",
    "rle_loss",
    "rub_loss",
    "sal_loss",
    "sample_mask",
    "synth_corpus",
    "tokenize",
    "train",
    "upper_bound_loss",
    "write_hearfeat",
]
