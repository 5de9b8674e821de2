"""depsum: depression screening from interview transcripts.

Pipeline: transcript ingestion -> extractive summarization under a token
budget (candidate n-grams ranked by embedding similarity, diversified with
maximal marginal relevance) -> word-score depression lexicon -> a small
convolutional classifier trained with focal loss.
"""

__version__ = "0.1.0"
