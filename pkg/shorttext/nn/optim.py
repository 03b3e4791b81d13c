"""
Plain gradient descent
"""
import logging

import numpy as np

from shorttext.errors import ContractError

logger = logging.getLogger(__name__)


def global_norm(params):
    total = 0.0
    for p in params:
        if p.trainable and p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    return float(np.sqrt(total))


def clip_grads(params, max_norm):
    """Rescale gradients in place so their global norm is at most ``max_norm``"""
    norm = global_norm(params)
    if max_norm and norm > max_norm:
        factor = max_norm / norm
        for p in params:
            if p.trainable and p.grad is not None:
                p.grad = p.grad * factor
        logger.debug("clipped gradient norm %.4f to %.4f", norm, max_norm)
    return norm


def sgd_step(params, lr):
    """values <- values - lr * grad for trainable parameters, then clear grads

    Frozen parameters are never written.
    """
    if not lr > 0:
        raise ContractError(f"learning rate must be positive, got {lr}")
    params = list(params)
    missing = [p.name for p in params if p.trainable and p.grad is None]
    if missing:
        raise ContractError(f"missing gradients for {', '.join(missing)}")
    for p in params:
        if not p.trainable:
            continue
        p.values = p.values - lr * p.grad
        p.grad = None


class SGD:
    """Fixed-rate gradient descent with optional global-norm clipping"""

    def __init__(self, params, lr, clip_norm=5.0):
        if not lr > 0:
            raise ContractError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.clip_norm = clip_norm

    def step(self):
        norm = clip_grads(self.params, self.clip_norm)
        sgd_step(self.params, self.lr)
        return norm
