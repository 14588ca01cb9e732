"""Runtime configuration: model locations, device, batching.

Model identity is configuration, not code. Every setting reads from an
environment variable and can be overridden by CLI flags; small local
checkpoints are the default deployment shape (see fixtures.py for
building offline ones).
"""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping


class SidecarError(Exception):
    """Configuration, corpus, or scoring failure."""


ENV_LM = "LM_SIDECAR_LM"
ENV_NSP = "LM_SIDECAR_NSP"
ENV_CLASSIFIER = "LM_SIDECAR_CLASSIFIER"
ENV_VOCAB = "LM_SIDECAR_VOCAB"
ENV_DEVICE = "LM_SIDECAR_DEVICE"
ENV_MAX_BATCH = "LM_SIDECAR_MAX_BATCH"


@dataclass(frozen=True)
class Settings:
    """Where the checkpoints live and how to run them.

    lm_path is required; nsp_path and classifier_path are optional
    capabilities (score responses carry null nsp without the former, the
    classify endpoint answers 503 without the latter). A classifier
    needs vocab_path, a text file with one topic label per line in
    vocabulary order.
    """

    lm_path: Path
    nsp_path: Path | None = None
    classifier_path: Path | None = None
    vocab_path: Path | None = None
    device: str = "cpu"
    max_batch: int = 8

    def __post_init__(self) -> None:
        if self.max_batch < 1:
            raise SidecarError(f"max_batch must be >= 1, got {self.max_batch}")
        if self.classifier_path is not None and self.vocab_path is None:
            raise SidecarError("a classifier checkpoint needs a vocab file")

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "Settings":
        env = os.environ if env is None else env
        lm = env.get(ENV_LM)
        if not lm:
            raise SidecarError(f"{ENV_LM} is not set; point it at an LM checkpoint")
        optional = {
            "nsp_path": env.get(ENV_NSP),
            "classifier_path": env.get(ENV_CLASSIFIER),
            "vocab_path": env.get(ENV_VOCAB),
        }
        return cls(
            lm_path=Path(lm),
            **{k: Path(v) if v else None for k, v in optional.items()},
            device=env.get(ENV_DEVICE, "cpu"),
            max_batch=int(env.get(ENV_MAX_BATCH, "8")),
        )


def add_model_args(parser: argparse.ArgumentParser) -> None:
    """Install the checkpoint flags shared by the serve and export CLIs."""
    parser.add_argument("--lm", help=f"LM checkpoint (default: ${ENV_LM})")
    parser.add_argument("--nsp", help=f"next-sentence checkpoint (${ENV_NSP})")
    parser.add_argument(
        "--classifier", help=f"classifier checkpoint (${ENV_CLASSIFIER})"
    )
    parser.add_argument("--vocab", help=f"topic vocabulary file (${ENV_VOCAB})")
    parser.add_argument("--device", help=f"torch device (${ENV_DEVICE}, default cpu)")
    parser.add_argument("--max-batch", type=int, help=f"batch cap (${ENV_MAX_BATCH})")


def settings_from_args(args: argparse.Namespace) -> Settings:
    """Resolve flags over environment variables into Settings."""
    env = os.environ
    lm = args.lm or env.get(ENV_LM)
    if not lm:
        raise SidecarError(f"pass --lm or set {ENV_LM}")
    optional = {
        "nsp_path": args.nsp or env.get(ENV_NSP),
        "classifier_path": args.classifier or env.get(ENV_CLASSIFIER),
        "vocab_path": args.vocab or env.get(ENV_VOCAB),
    }
    max_batch = args.max_batch
    if max_batch is None:
        max_batch = int(env.get(ENV_MAX_BATCH, "8"))
    return Settings(
        lm_path=Path(lm),
        **{k: Path(v) if v else None for k, v in optional.items()},
        device=args.device or env.get(ENV_DEVICE, "cpu"),
        max_batch=max_batch,
    )


def load_labels(path: Path) -> tuple[str, ...]:
    labels = tuple(
        line.strip()
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    )
    if len(labels) != len(set(labels)):
        raise SidecarError(f"{path}: duplicate topic labels")
    if len(labels) < 2:
        raise SidecarError(f"{path}: a topic vocabulary needs at least 2 labels")
    return labels
