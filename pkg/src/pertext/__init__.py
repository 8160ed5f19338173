"""Persian text refinement: punctuation restoration, ZWNJ correction, ezafe marking."""

from .corpus import (
    CorpusEntry,
    CorpusSentence,
    SplitSpec,
    build_ezafe_dataset,
    build_punct_dataset,
    build_zwnj_dataset,
    load_dataset_file,
    read_corpus,
    read_corpus_file,
    save_dataset_file,
    sentence_text,
    split_dataset,
)
from .errors import PertextError
from .metrics import EvalReport, accuracy, evaluate, macro_f1, per_class_prf
from .pipeline import (
    EzafeMarker,
    PipelineConfig,
    RefineResult,
    apply_ezafe,
    apply_punct,
    apply_zwnj,
    refine,
)
from .remote import RemoteEndpoint, RemoteTagger, Transport, healthcheck, tag_remote
from .tagger import TaggerModel, TrainConfig, featurize, majority_baseline, predict, train
from .textproc import (
    NormalizationConfig,
    detokenize,
    normalize,
    strip_punctuation,
    tokenize,
)
from .types import (
    ZWNJ,
    Label,
    LabeledSequence,
    LabelSet,
    Separator,
    Task,
    Token,
    label_set_for,
)

__version__ = "0.1.0"

__all__ = [
    "CorpusEntry",
    "CorpusSentence",
    "EvalReport",
    "EzafeMarker",
    "Label",
    "LabelSet",
    "LabeledSequence",
    "NormalizationConfig",
    "PertextError",
    "PipelineConfig",
    "RefineResult",
    "RemoteEndpoint",
    "RemoteTagger",
    "Separator",
    "SplitSpec",
    "TaggerModel",
    "Task",
    "Token",
    "TrainConfig",
    "Transport",
    "ZWNJ",
    "accuracy",
    "apply_ezafe",
    "apply_punct",
    "apply_zwnj",
    "build_ezafe_dataset",
    "build_punct_dataset",
    "build_zwnj_dataset",
    "detokenize",
    "evaluate",
    "featurize",
    "healthcheck",
    "label_set_for",
    "load_dataset_file",
    "macro_f1",
    "majority_baseline",
    "normalize",
    "per_class_prf",
    "predict",
    "read_corpus",
    "read_corpus_file",
    "refine",
    "save_dataset_file",
    "sentence_text",
    "split_dataset",
    "strip_punctuation",
    "tag_remote",
    "tokenize",
    "train",
]
