"""Zero-shot paraphrasing toolkit.

Trains a bilingual encoder-decoder with translation + autoencoding
objectives and a continuous embedding-output head, decodes by nearest
neighbor in a pre-trained embedding space, and ships the full evaluation
stack (diversity metrics, semantic-score bucketing, A/B human judging).
"""

__version__ = "0.1.0"
