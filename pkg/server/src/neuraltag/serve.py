"""Serve a fine-tuned checkpoint over the line-oriented tagging protocol (v1)."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import torch

from .data import LABELS, macro_f1
from .finetune import CHECKPOINT_META, _quiet_transformers

PROTOCOL_VERSION = 1
VALID_SEPS = {"sp", "zwnj", "none"}


class CheckpointError(ValueError):
    pass


@dataclass
class Predictor:
    task: str
    classes: tuple[str, ...]
    binary: bool
    max_length: int
    tokenizer: object
    model: object

    @classmethod
    def load(cls, checkpoint_dir) -> "Predictor":
        _quiet_transformers()
        from transformers import AutoModelForTokenClassification, AutoTokenizer

        checkpoint_dir = Path(checkpoint_dir)
        meta_path = checkpoint_dir / CHECKPOINT_META
        if not meta_path.is_file():
            raise CheckpointError(f"{checkpoint_dir} has no {CHECKPOINT_META}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        if meta.get("format") != 1:
            raise CheckpointError(f"unsupported checkpoint format {meta.get('format')!r}")
        task = meta["task"]
        classes = tuple(meta["classes"])
        if classes != LABELS.get(task):
            raise CheckpointError(f"checkpoint label set {classes} does not match task {task}")
        tokenizer = AutoTokenizer.from_pretrained(checkpoint_dir)
        model = AutoModelForTokenClassification.from_pretrained(checkpoint_dir)
        model.eval()
        return cls(task, classes, bool(meta["binary"]), int(meta["max_length"]), tokenizer, model)

    def predict(self, words: list[str]) -> list[str]:
        enc = self.tokenizer(
            [list(words)],
            is_split_into_words=True,
            truncation=True,
            max_length=self.max_length,
            return_tensors="pt",
        )
        with torch.no_grad():
            logits = self.model(**enc).logits[0]
        # Words beyond the truncation window keep the "no change" class.
        labels = [self.classes[-1]] * len(words)
        prev = None
        for pos, wid in enumerate(enc.word_ids(0)):
            if wid is not None and wid != prev:
                if self.binary:
                    labels[wid] = "1" if float(logits[pos, 0]) >= 0.0 else "0"
                else:
                    labels[wid] = self.classes[int(torch.argmax(logits[pos]))]
            prev = wid
        return labels


def hello_message(predictor: Predictor, name: str) -> dict:
    return {"proto": PROTOCOL_VERSION, "name": name, "tasks": [predictor.task]}


def handle_request_line(predictor: Predictor, line: str) -> dict:
    """One request line in, one response object out; never raises."""
    try:
        req = json.loads(line)
    except json.JSONDecodeError:
        return {"id": 0, "error": "malformed JSON line"}
    if not isinstance(req, dict):
        return {"id": 0, "error": "request is not an object"}
    req_id = req.get("id")
    if not isinstance(req_id, int) or req_id < 0:
        return {"id": 0, "error": "missing or invalid request id"}
    task = req.get("task")
    if task != predictor.task:
        return {"id": req_id, "error": f"unsupported task {task!r}; serving {predictor.task}"}
    tokens = req.get("tokens")
    if not isinstance(tokens, list) or not tokens:
        return {"id": req_id, "error": "tokens must be a non-empty list"}
    if not all(isinstance(t, str) and t for t in tokens):
        return {"id": req_id, "error": "tokens must be non-empty strings"}
    seps = req.get("seps")
    if seps is not None:
        if not isinstance(seps, list) or len(seps) != len(tokens):
            return {"id": req_id, "error": "seps must match tokens in length"}
        if not all(s in VALID_SEPS for s in seps):
            return {"id": req_id, "error": "unknown separator value"}
    try:
        labels = predictor.predict(tokens)
    except Exception as exc:  # noqa: BLE001 -- the server must answer, not die
        return {"id": req_id, "error": f"prediction failed: {exc}"}
    if len(labels) != len(tokens) or any(l not in predictor.classes for l in labels):
        return {"id": req_id, "error": "internal error: invalid prediction"}
    return {"id": req_id, "labels": labels}


def serve_stdio(predictor: Predictor, name: str = "neuraltag") -> None:
    """Answer requests from stdin on stdout until EOF; one JSON object per line."""
    sys.stdout.write(json.dumps(hello_message(predictor, name), ensure_ascii=False) + "\n")
    sys.stdout.flush()
    for line in sys.stdin:
        if not line.strip():
            continue
        response = handle_request_line(predictor, line)
        sys.stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        sys.stdout.flush()


def make_http_server(predictor: Predictor, host: str, port: int, name: str = "neuraltag"):
    """HTTP binding: POST /v1/tag with a request object, GET /v1/health for hello."""

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def _send(self, status: int, obj: dict) -> None:
            body = json.dumps(obj, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/v1/health":
                self._send(200, hello_message(predictor, name))
            else:
                self._send(404, {"id": 0, "error": "not found"})

        def do_POST(self):
            if self.path != "/v1/tag":
                self._send(404, {"id": 0, "error": "not found"})
                return
            length = int(self.headers.get("Content-Length", 0))
            body = self.rfile.read(length).decode("utf-8", errors="replace")
            self._send(200, handle_request_line(predictor, body))

    return ThreadingHTTPServer((host, port), Handler)


def evaluate_checkpoint(checkpoint_dir, dataset_path) -> dict:
    """Macro F1 and accuracy of a checkpoint over a JSONL dataset."""
    from .data import load_jsonl

    predictor = Predictor.load(checkpoint_dir)
    examples = load_jsonl(dataset_path, predictor.task)
    pred_all: list[str] = []
    gold_all: list[str] = []
    for ex in examples:
        pred_all.extend(predictor.predict(list(ex.words)))
        gold_all.extend(ex.labels)
    correct = sum(p == g for p, g in zip(pred_all, gold_all))
    return {
        "task": predictor.task,
        "macro_f1": macro_f1(pred_all, gold_all, predictor.classes),
        "accuracy": correct / len(gold_all),
        "token_total": len(gold_all),
    }
