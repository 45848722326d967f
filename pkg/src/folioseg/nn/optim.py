"""Gradient-descent optimizers over named parameter dictionaries."""

import numpy as np


class Optimizer:
    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        raise NotImplementedError


class Adam(Optimizer):
    """Adam with bias correction; state is keyed by parameter name."""

    def __init__(self, lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params, grads):
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for name, param in params.items():
            grad = grads[name]
            if name not in self._m:
                self._m[name] = np.zeros_like(param)
                self._v[name] = np.zeros_like(param)
            m = self._m[name]
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(grad)
            m_hat = m / correction1
            v_hat = v / correction2
            param -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(param.dtype)


class SGD(Optimizer):
    """Plain SGD with optional momentum."""

    def __init__(self, lr: float = 0.01, momentum: float = 0.0):
        self.lr = lr
        self.momentum = momentum
        self._velocity: dict[str, np.ndarray] = {}

    def step(self, params, grads):
        for name, param in params.items():
            grad = grads[name]
            if self.momentum:
                if name not in self._velocity:
                    self._velocity[name] = np.zeros_like(param)
                vel = self._velocity[name]
                vel *= self.momentum
                vel += grad
                grad = vel
            param -= (self.lr * grad).astype(param.dtype)
