"""Self-contained tiny checkpoints for offline runs and tests.

Builds randomly initialized word-level models that share one vocabulary:
a small causal LM, a next-sentence head, and a topic classifier. They
load through the exact same code path as full-size checkpoints, so the
service and exporter can be exercised without downloading anything.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

SPECIALS = ("[UNK]", "[PAD]", "[BOS]", "[CLS]", "[SEP]")
BIN_TOKENS = tuple(f"[BIN{k}]" for k in range(10))


def _word_tokenizer(vocab: dict[str, int], pair_template: bool):
    from tokenizers import Tokenizer
    from tokenizers.models import WordLevel
    from tokenizers.pre_tokenizers import WhitespaceSplit
    from tokenizers.processors import TemplateProcessing

    tok = Tokenizer(WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = WhitespaceSplit()
    if pair_template:
        tok.post_processor = TemplateProcessing(
            single="[CLS] $A [SEP]",
            pair="[CLS] $A [SEP] $B:1 [SEP]:1",
            special_tokens=[
                ("[CLS]", vocab["[CLS]"]),
                ("[SEP]", vocab["[SEP]"]),
            ],
        )
    return tok


def _fast_tokenizer(vocab: dict[str, int], pair_template: bool):
    from transformers import PreTrainedTokenizerFast

    kwargs = {"unk_token": "[UNK]", "pad_token": "[PAD]"}
    if pair_template:
        kwargs.update(cls_token="[CLS]", sep_token="[SEP]")
    else:
        kwargs.update(bos_token="[BOS]")
    return PreTrainedTokenizerFast(
        tokenizer_object=_word_tokenizer(vocab, pair_template), **kwargs
    )


def build_fixtures(
    out_dir: Path | str,
    words: Sequence[str],
    labels: Sequence[str],
    seed: int = 0,
) -> dict[str, Path]:
    """Write lm/, nsp/, classifier/ checkpoints and vocab.txt under out_dir."""
    import torch
    import transformers
    from transformers import (
        BertConfig,
        BertForNextSentencePrediction,
        BertForSequenceClassification,
        GPT2Config,
        GPT2LMHeadModel,
    )

    transformers.utils.logging.disable_progress_bar()
    out_dir = Path(out_dir)
    tokens = list(SPECIALS) + list(BIN_TOKENS) + sorted(set(words))
    vocab = {t: i for i, t in enumerate(tokens)}

    lm_dir = out_dir / "lm"
    torch.manual_seed(seed)
    lm = GPT2LMHeadModel(
        GPT2Config(
            vocab_size=len(vocab),
            n_positions=128,
            n_embd=32,
            n_layer=2,
            n_head=2,
            bos_token_id=vocab["[BOS]"],
            eos_token_id=vocab["[BOS]"],
            pad_token_id=vocab["[PAD]"],
        )
    )
    lm.save_pretrained(lm_dir)
    _fast_tokenizer(vocab, pair_template=False).save_pretrained(lm_dir)

    bert_cfg = dict(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
        pad_token_id=vocab["[PAD]"],
    )
    nsp_dir = out_dir / "nsp"
    torch.manual_seed(seed + 1)
    nsp = BertForNextSentencePrediction(BertConfig(**bert_cfg))
    nsp.save_pretrained(nsp_dir)
    _fast_tokenizer(vocab, pair_template=True).save_pretrained(nsp_dir)

    clf_dir = out_dir / "classifier"
    torch.manual_seed(seed + 2)
    clf = BertForSequenceClassification(
        BertConfig(
            **bert_cfg,
            num_labels=len(labels),
            id2label={i: lab for i, lab in enumerate(labels)},
            label2id={lab: i for i, lab in enumerate(labels)},
        )
    )
    clf.save_pretrained(clf_dir)
    _fast_tokenizer(vocab, pair_template=True).save_pretrained(clf_dir)

    vocab_path = out_dir / "vocab.txt"
    vocab_path.write_text("".join(f"{lab}\n" for lab in labels), encoding="utf-8")
    return {"lm": lm_dir, "nsp": nsp_dir, "classifier": clf_dir, "vocab": vocab_path}


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lm-sidecar-fixtures",
        description="build tiny random checkpoints from a JSONL corpus",
    )
    parser.add_argument("--corpus", required=True, help="JSONL of {id, sentences}")
    parser.add_argument("--output", required=True, help="directory for checkpoints")
    parser.add_argument(
        "--labels",
        nargs="+",
        default=["T00", "T01", "NO-TOPIC"],
        help="topic vocabulary for the classifier head",
    )
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    from .corpus import load_documents

    docs = load_documents(Path(args.corpus))
    words = sorted({w for doc in docs for s in doc.sentences for w in s.split()})
    if not words:
        print("corpus has no tokens", file=sys.stderr)
        return 1
    paths = build_fixtures(Path(args.output), words, args.labels, seed=args.seed)
    print(f"4 fixture artifacts -> {Path(args.output)}")
    for name in ("lm", "nsp", "classifier", "vocab"):
        print(f"  {name}: {paths[name]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
