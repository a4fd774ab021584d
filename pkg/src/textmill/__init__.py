"""textmill: corpus ingestion, summarization, topic modelling, and
summary evaluation with a reproducible command-line pipeline."""

__version__ = "0.1.0"
