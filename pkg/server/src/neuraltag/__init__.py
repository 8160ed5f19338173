"""Neural token-classification server speaking the refinement toolkit's tagging protocol."""

from .data import LABELS, TASKS, DatasetError, load_jsonl
from .finetune import DEFAULT_BASE_MODEL, FinetuneConfig, finetune
from .serve import Predictor, evaluate_checkpoint, handle_request_line, make_http_server, serve_stdio

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BASE_MODEL",
    "DatasetError",
    "FinetuneConfig",
    "LABELS",
    "Predictor",
    "TASKS",
    "evaluate_checkpoint",
    "finetune",
    "handle_request_line",
    "load_jsonl",
    "make_http_server",
    "serve_stdio",
]
