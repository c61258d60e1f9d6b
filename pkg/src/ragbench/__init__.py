"""Benchmark harness for evidence-grounded multiple-choice question answering."""

__version__ = "0.1.0"

STRATEGIES = ("zero_shot", "rag", "rar")
