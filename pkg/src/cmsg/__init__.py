"""cmsg: turn an image into a sarcastic caption.

The engine extracts image information (tags + sentimental caption) from
pluggable model backends, flips the caption's valence to build a first
sentence, generates keyword-constrained candidate continuations, and picks
the best candidate with a three-factor ranker (image-text relation,
sarcasticness, grammaticality).
"""

__version__ = "0.1.0"
