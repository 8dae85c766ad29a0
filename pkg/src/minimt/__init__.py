"""minimt: a small-corpus neural machine translation toolkit.

Everything needed to go from two raw monolingual text files to BLEU
numbers on a desk machine: hybrid sentence alignment, corpus statistics
and splitting, an LSTM encoder-decoder (optionally bidirectional and/or
attentional) with hand-written reverse-mode gradients on top of numpy,
Adam training with early stopping, greedy decoding, and smoothed
cumulative BLEU evaluation.
"""

__version__ = "0.1.0"
