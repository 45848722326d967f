"""Losses and the probability transform they share."""

import numpy as np


def softmax(logits: np.ndarray, axis: int = 1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


class CrossEntropyLoss:
    """Mean pixelwise cross-entropy on flattened (pixels, classes) logits."""

    def __init__(self):
        self._cache = None

    def __call__(self, logits: np.ndarray, targets: np.ndarray) -> float:
        if logits.ndim != 2 or targets.ndim != 1 or logits.shape[0] != targets.shape[0]:
            raise ValueError(
                f"expected (pixels, classes) and (pixels,), got {logits.shape} and {targets.shape}"
            )
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        log_probs = shifted - log_norm
        picked = log_probs[np.arange(targets.shape[0]), targets]
        self._cache = (np.exp(log_probs), targets)
        return float(-picked.mean())

    def backward(self) -> np.ndarray:
        """Gradient of the last computed loss w.r.t. the logits."""
        probs, targets = self._cache
        grad = probs.copy()
        grad[np.arange(targets.shape[0]), targets] -= 1.0
        return grad / targets.shape[0]
