""" Constant-input MLP with manual backpropagation, plus its optimizers """

import numpy as np

from snce.process.seeding import generator, INIT

ACTIVATIONS = {
    'relu': (lambda z: np.maximum(z, 0.0), lambda z: (z > 0).astype(np.float64)),
    'tanh': (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
}


class MlpModel(object):
    """
    `depth` affine layers applied to a fixed all-ones input of width
    `hidden_width`. Hidden layers use the activation; the last layer emits
    `out_dim` values (K logits, or a 2D point).
    """
    def __init__(self, spec, out_dim, seed):
        self.spec = spec
        self.out_dim = int(out_dim)
        self.act, self.dact = ACTIVATIONS[spec.activation]

        width = spec.hidden_width
        self.input = np.ones(width)

        rng = generator(seed, INIT)
        self.params = []
        for layer in range(spec.depth):
            fan_out = self.out_dim if layer == spec.depth - 1 else width
            # He init for hidden layers, LeCun scale for the output head
            gain = 1.0 if layer == spec.depth - 1 else 2.0
            self.params.append(rng.standard_normal((fan_out, width)) * np.sqrt(gain / width))
            self.params.append(np.zeros(fan_out))

    @property
    def n_params(self):
        return sum(p.size for p in self.params)

    def forward(self):
        """
        Output vector and the cache backward() needs
        """
        a, cache = self.input, []
        last = self.spec.depth - 1
        for layer in range(self.spec.depth):
            W, b = self.params[2 * layer], self.params[2 * layer + 1]
            z = W @ a + b
            cache.append((a, z))
            a = z if layer == last else self.act(z)

        return a, cache

    def backward(self, grad_out, cache):
        """
        Parameter gradients, in the order of self.params
        """
        grads = [None] * len(self.params)
        g = np.asarray(grad_out, dtype=np.float64)
        last = self.spec.depth - 1
        for layer in reversed(range(self.spec.depth)):
            a, z = cache[layer]
            if layer != last:
                g = g * self.dact(z)

            grads[2 * layer] = np.outer(g, a)
            grads[2 * layer + 1] = g
            g = self.params[2 * layer].T @ g

        return grads

    def pattern(self, cache):
        """
        ReLU on/off pattern of the hidden layers; None for smooth activations
        """
        if self.spec.activation != 'relu':
            return None
        return tuple((z > 0).tobytes() for _, z in cache[:-1])

    def locate(self, flat_index):
        """
        (param array index, flat position inside it) for a global index
        """
        for i, p in enumerate(self.params):
            if flat_index < p.size:
                return i, flat_index
            flat_index -= p.size

        raise IndexError('Parameter index out of range')


class Adam(object):
    def __init__(self, params, spec):
        self.lr = spec.learning_rate
        self.beta1, self.beta2 = spec.betas
        self.eps = spec.eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class Sgd(object):
    def __init__(self, params, spec):
        self.lr = spec.learning_rate

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g


OPTIMIZERS = {'adam': Adam, 'sgd': Sgd}


def make_optimizer(params, spec):
    return OPTIMIZERS[spec.kind](params, spec)
