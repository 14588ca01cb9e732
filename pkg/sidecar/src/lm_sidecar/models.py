"""Model loading and deterministic inference.

One bundle owns a causal LM for window log-probabilities, an optional
next-sentence model, and an optional topic classifier. Inference runs in
eval mode under no_grad at float32 with no sampling, so identical inputs
give identical outputs, request after request. A single lock serializes
forward passes; batching happens inside a request, never across
requests.
"""

from __future__ import annotations

import math
import threading
from typing import Sequence

import torch

from .config import Settings, SidecarError, load_labels


def render_bin(text: str, position_bin: int) -> str:
    """Prefix the coarse document position as a leading bracketed token."""
    if not 0 <= position_bin <= 9:
        raise SidecarError(f"position_bin={position_bin} outside [0, 9]")
    return f"[BIN{position_bin}] {text}"


class ModelBundle:
    """Lazily loaded checkpoints plus the scoring operations over them."""

    def __init__(self, settings: Settings):
        self.settings = settings
        self.vocab: tuple[str, ...] | None = None
        self._ready = threading.Event()
        self._error: str | None = None
        self._infer_lock = threading.Lock()
        self._lm = None
        self._nsp = None
        self._classifier = None

    @property
    def ready(self) -> bool:
        return self._ready.is_set()

    @property
    def error(self) -> str | None:
        return self._error

    @property
    def has_nsp(self) -> bool:
        return self._nsp is not None

    @property
    def has_classifier(self) -> bool:
        return self._classifier is not None

    def start(self) -> None:
        """Load in the background; endpoints answer 503 until ready."""
        threading.Thread(target=self._load_guarded, daemon=True).start()

    def load(self) -> None:
        try:
            self._load()
        except Exception as e:
            self._error = str(e)
            raise
        self._ready.set()

    def _load_guarded(self) -> None:
        try:
            self.load()
        except Exception:
            pass

    def _load(self) -> None:
        import transformers
        from transformers import (
            AutoModelForCausalLM,
            AutoModelForSequenceClassification,
            AutoTokenizer,
            BertForNextSentencePrediction,
        )

        transformers.utils.logging.disable_progress_bar()
        s = self.settings
        device = torch.device(s.device)
        self._device = device
        self._lm_tokenizer = AutoTokenizer.from_pretrained(s.lm_path)
        if self._lm_tokenizer.pad_token is None:
            self._lm_tokenizer.pad_token = (
                self._lm_tokenizer.bos_token or self._lm_tokenizer.unk_token
            )
        self._lm = AutoModelForCausalLM.from_pretrained(s.lm_path).to(device).eval()
        self._lm_max = int(
            getattr(self._lm.config, "n_positions", 0)
            or getattr(self._lm.config, "max_position_embeddings", 512)
        )
        if s.nsp_path is not None:
            self._nsp_tokenizer = AutoTokenizer.from_pretrained(s.nsp_path)
            self._nsp = (
                BertForNextSentencePrediction.from_pretrained(s.nsp_path)
                .to(device)
                .eval()
            )
            self._nsp_max = int(self._nsp.config.max_position_embeddings)
        if s.classifier_path is not None:
            labels = load_labels(s.vocab_path)
            self._clf_tokenizer = AutoTokenizer.from_pretrained(s.classifier_path)
            self._classifier = (
                AutoModelForSequenceClassification.from_pretrained(s.classifier_path)
                .to(device)
                .eval()
            )
            self._clf_max = int(self._classifier.config.max_position_embeddings)
            found = int(self._classifier.config.num_labels)
            if found != len(labels):
                raise SidecarError(
                    f"classifier has {found} labels, vocabulary has {len(labels)}"
                )
            self.vocab = labels

    # ------------------------------------------------------------------
    # scoring

    def sequence_logprobs(self, texts: Sequence[str]) -> list[float]:
        """Chain-rule log-probability of each text under the causal LM.

        Sequences are right-padded within a batch; with a causal mask the
        pad positions cannot influence real tokens, so batch packing does
        not change any sequence's score path.
        """
        bos = self._lm_tokenizer.bos_token
        prefixed = [f"{bos} {t}" if bos else t for t in texts]
        out: list[float] = []
        step = self.settings.max_batch
        with self._infer_lock:
            for i in range(0, len(prefixed), step):
                chunk = prefixed[i : i + step]
                enc = self._lm_tokenizer(
                    chunk,
                    return_tensors="pt",
                    padding=True,
                    truncation=True,
                    max_length=self._lm_max,
                ).to(self._device)
                with torch.no_grad():
                    logits = self._lm(**enc).logits
                logp = torch.log_softmax(logits[:, :-1].float(), dim=-1)
                targets = enc.input_ids[:, 1:]
                token_lp = logp.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
                valid = enc.attention_mask[:, 1:].bool()
                for row in range(len(chunk)):
                    out.append(float(token_lp[row][valid[row]].sum()))
        return out

    def nsp_probs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        """P(second window truly follows the first), label 0 of the head."""
        out: list[float] = []
        step = self.settings.max_batch
        with self._infer_lock:
            for i in range(0, len(pairs), step):
                chunk = pairs[i : i + step]
                enc = self._nsp_tokenizer(
                    [a for a, _ in chunk],
                    [b for _, b in chunk],
                    return_tensors="pt",
                    padding=True,
                    truncation=True,
                    max_length=self._nsp_max,
                ).to(self._device)
                with torch.no_grad():
                    logits = self._nsp(**enc).logits
                probs = torch.softmax(logits.float(), dim=-1)[:, 0]
                out.extend(float(p) for p in probs)
        return out

    def score_windows(self, sentences: Sequence[str], C: int) -> list[dict]:
        """One score entry per inner boundary, windows truncated at edges."""
        if not sentences or any(not s.strip() for s in sentences):
            raise SidecarError("sentences must be non-empty text")
        if C < 1:
            raise SidecarError(f"C must be >= 1, got {C}")
        n = len(sentences)
        texts: list[str] = []
        pairs: list[tuple[str, str]] = []
        for b in range(1, n):
            left = " ".join(sentences[max(0, b - C) : b])
            right = " ".join(sentences[b : min(n, b + C)])
            texts.extend((f"{left} {right}", left, right))
            pairs.append((left, right))
        logps = self.sequence_logprobs(texts)
        nsps = self.nsp_probs(pairs) if self.has_nsp else [None] * (n - 1)
        entries = []
        for i, b in enumerate(range(1, n)):
            joint, left_lp, right_lp = logps[3 * i : 3 * i + 3]
            for name, v in (("joint", joint), ("left", left_lp), ("right", right_lp)):
                if not math.isfinite(v):
                    raise SidecarError(f"non-finite logp_{name} at boundary {b}")
            entries.append(
                {
                    "b": b,
                    "logp_joint": joint,
                    "logp_left": left_lp,
                    "logp_right": right_lp,
                    "nsp": nsps[i],
                }
            )
        return entries

    def classify_logprobs(self, text: str, position_bin: int) -> list[float]:
        """Log-softmax over the configured topic vocabulary for a span."""
        if not self.has_classifier:
            raise SidecarError("classifier is not configured")
        if not text.strip():
            raise SidecarError("text must be non-empty")
        rendered = render_bin(text, position_bin)
        with self._infer_lock:
            enc = self._clf_tokenizer(
                rendered,
                return_tensors="pt",
                truncation=True,
                max_length=self._clf_max,
            ).to(self._device)
            with torch.no_grad():
                logits = self._classifier(**enc).logits
            logp = torch.log_softmax(logits.float(), dim=-1)[0]
        return [float(v) for v in logp]
