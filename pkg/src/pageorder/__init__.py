"""Page-order recovery from page embeddings: models, training, benchmarks."""

__version__ = "0.1.0"
