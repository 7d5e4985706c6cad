"""qaeval: evaluation toolkit for long-form question-answering output.

Scores candidate answers against references with an entailment + lexical
hybrid metric and classical baselines, collects human yes/no judgments,
and reports agreement between evaluators and human gold labels.
"""

__version__ = "0.1.0"
