"""Memoryless finite-field MWRC: one additive uplink and three additive downlinks.

Noise is drawn from per-(seed, trial, node, call) counter-based streams, so a
trial's noise does not depend on which other trials ran before it or in what
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .rates import ChannelSpec

RELAY = 0


def sample_noise(pmf: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling of ``n`` i.i.d. symbols."""
    cdf = np.cumsum(pmf)
    out = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right")
    return np.minimum(out, len(pmf) - 1)


@dataclass
class ChannelState:
    spec: ChannelSpec
    seed: int = 0
    trial: int = 0
    _calls: dict = field(default_factory=dict, repr=False)

    def rng(self, node: int) -> np.random.Generator:
        call = self._calls.get(node, 0)
        self._calls[node] = call + 1
        return np.random.default_rng([self.seed, self.trial, node, call])

    def noise(self, node: int, n: int) -> np.ndarray:
        return sample_noise(self.spec.noise_pmf(node), n, self.rng(node)).astype(np.int64)

    def next_trial(self) -> "ChannelState":
        return ChannelState(self.spec, self.seed, self.trial + 1)


def _as_array(x, F: int) -> np.ndarray:
    a = np.asarray(getattr(x, "values", x), dtype=np.int64)
    if a.ndim != 1:
        raise ValidationError("channel inputs must be vectors")
    if a.size and (a.min() < 0 or a.max() >= F):
        raise ValidationError(f"channel input outside [0, {F})")
    return a


def uplink(x1, x2, x3, state: ChannelState) -> np.ndarray:
    """Y0 = X1 ⊕ X2 ⊕ X3 ⊕ N0, symbol by symbol."""
    F = state.spec.F
    xs = [_as_array(x, F) for x in (x1, x2, x3)]
    if len({len(x) for x in xs}) != 1:
        raise ValidationError(f"uplink inputs have lengths {[len(x) for x in xs]}")
    g = state.spec.group()
    y = g.add(g.add(xs[0], xs[1]), xs[2])
    return np.asarray(g.add(y, state.noise(RELAY, len(xs[0]))), dtype=np.int64)


def downlink(x0, user: int, state: ChannelState) -> np.ndarray:
    """Yi = X0 ⊕ Ni."""
    if user not in (1, 2, 3):
        raise ValidationError(f"invalid user index {user}")
    x = _as_array(x0, state.spec.F)
    g = state.spec.group()
    return np.asarray(g.add(x, state.noise(user, len(x))), dtype=np.int64)
