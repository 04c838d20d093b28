"""Shared locations and loaders for the test suite."""
from pathlib import Path

from fockop.cli import load_corpus

PKG_ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = PKG_ROOT / "corpus"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def corpus_problems():
    """(label, WcoProblem) pairs for every shipped problem file."""
    return [(lp.label, lp.problem) for lp in load_corpus(CORPUS_DIR)]


def corpus_path(stem: str) -> Path:
    return CORPUS_DIR / f"{stem}.json"
