"""Embeddings of Lebesgue spaces: stable laws, formal disintegrations and continuous logic."""

__version__ = "0.1.0"
