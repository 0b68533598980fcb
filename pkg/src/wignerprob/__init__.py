"""Phase-space quasiprobabilities and cell-based probabilities for single-mode states."""
