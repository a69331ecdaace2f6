"""Synthetic equation derivations: generation, perturbation, prompts, metrics."""

import json

from . import _core
from ._core import (
    ConfigError,
    LatexError,
    RecordError,
    bleu,
    differentiate,
    evaluate,
    gleu,
    integrate,
    manual_score,
    normalize,
    normalize_equation,
    rouge,
)

__all__ = [
    "ConfigError",
    "LatexError",
    "RecordError",
    "bleu",
    "differentiate",
    "evaluate",
    "generate",
    "gleu",
    "integrate",
    "manual_score",
    "normalize",
    "normalize_equation",
    "perturb",
    "prompt",
    "remove_steps",
    "replay",
    "rouge",
    "stats",
]


def _config(config):
    return {k: str(v).lower() if isinstance(v, bool) else str(v) for k, v in (config or {}).items()}


def generate(count, seed, config=None):
    """Derivation records as dicts, identical to `eqderiv generate` output."""
    text = _core.generate_jsonl(count, seed, _config(config))
    return [json.loads(line) for line in text.splitlines()]


def replay(record):
    """(valid, reason) for a derivation record."""
    return _core.replay(json.dumps(record))


def perturb(record, kind, config=None):
    """VR, EE, AG or SR applied to a static record; None when not produced."""
    out = _core.perturb(json.dumps(record), kind, _config(config))
    return None if out is None else json.loads(out)


def prompt(record):
    return json.loads(_core.prompt(json.dumps(record)))


def remove_steps(prompt_record):
    out = _core.remove_steps(json.dumps(prompt_record))
    return None if out is None else json.loads(out)


def stats(records, top=10):
    text = "".join(json.dumps(r) + "\n" for r in records)
    return json.loads(_core.stats(text, top))
