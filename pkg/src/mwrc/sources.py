"""Joint source distributions over three users and their information measures.

All quantities are in bits.  A :class:`JointPmf3` is a dense table
``p[w1, w2, w3]``; every entropy and mutual information used by the rate
bounds is derived from it by marginalisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import TooLargeError, ValidationError

PMF_TOL = 1e-12
DEFAULT_COMPONENT_CAP = 2**24

USERS = (1, 2, 3)


def entropy(p: np.ndarray) -> float:
    """Shannon entropy in bits of a pmf given as an array of any shape."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return max(0.0, float(-(p * np.log2(p)).sum()))


def _others(i: int) -> tuple[int, int]:
    j, k = (u for u in USERS if u != i)
    return j, k


def _pair(i: int, j: int) -> tuple[int, int]:
    if i == j or i not in USERS or j not in USERS:
        raise ValidationError(f"invalid user pair ({i}, {j})")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class JointPmf3:
    """Probability table of (W1, W2, W3) over finite alphabets."""

    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 3 or min(t.shape) < 1:
            raise ValidationError(f"joint pmf must be a non-empty 3-d table, got shape {t.shape}")
        if not np.all(np.isfinite(t)) or t.min() < 0:
            raise ValidationError("joint pmf has negative or non-finite entries")
        if abs(t.sum() - 1.0) > PMF_TOL:
            raise ValidationError(f"joint pmf sums to {t.sum()!r}, not 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.table.shape

    def marginal(self, users: Iterable[int]) -> np.ndarray:
        """Marginal table over ``users`` (1-based), axes kept in user order."""
        keep = sorted(set(users))
        drop = tuple(u - 1 for u in USERS if u not in keep)
        return self.table.sum(axis=drop) if drop else self.table

    def entropy(self, users: Iterable[int]) -> float:
        users = list(users)
        return entropy(self.marginal(users)) if users else 0.0

    def permute(self, order: Sequence[int]) -> "JointPmf3":
        """Relabel users: new user ``n`` is old user ``order[n-1]``."""
        if sorted(order) != [1, 2, 3]:
            raise ValidationError(f"not a permutation of users: {order}")
        return JointPmf3(np.transpose(self.table, [u - 1 for u in order]))

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        """Draw ``m`` i.i.d. symbol triples; returns an int array of shape (3, m)."""
        flat = self.table.ravel()
        cdf = np.cumsum(flat)
        idx = np.searchsorted(cdf, rng.random(m) * cdf[-1], side="right")
        idx = np.minimum(idx, flat.size - 1)
        return np.array(np.unravel_index(idx, self.shape))

    @classmethod
    def from_entries(cls, shape: Sequence[int], entries: Iterable[tuple[int, int, int, float]]) -> "JointPmf3":
        t = np.zeros(tuple(shape), dtype=float)
        for w1, w2, w3, pr in entries:
            try:
                t[w1, w2, w3] += pr
            except IndexError:
                raise ValidationError(f"entry ({w1}, {w2}, {w3}) outside alphabet {tuple(shape)}") from None
        return cls(t)

    @classmethod
    def product(cls, p1, p2, p3) -> "JointPmf3":
        return cls(np.einsum("a,b,c->abc", *(np.asarray(p, float) for p in (p1, p2, p3))))


@dataclass(frozen=True)
class InfoProfile:
    """Conditional entropies and mutual informations of a source triple.

    Indexing helpers take 1-based user labels: ``h_given_others(1)`` is
    H(W1|W2,W3), ``h_pair(2, 3)`` is H(W2,W3|W1), ``mi(1, 2)`` is
    I(W1;W2|W3), ``mi_uncond(1, 2)`` is I(W1;W2).
    """

    h_cond: tuple[float, float, float]
    h_pair_cond: Mapping[tuple[int, int], float]
    mi_cond: Mapping[tuple[int, int], float]
    mi_triple: float
    h_joint: float
    h_single: tuple[float, float, float]
    mi_pair: Mapping[tuple[int, int], float]

    def h_given_others(self, i: int) -> float:
        return self.h_cond[i - 1]

    def h_pair(self, i: int, j: int) -> float:
        return self.h_pair_cond[_pair(i, j)]

    def mi(self, i: int, j: int) -> float:
        return self.mi_cond[_pair(i, j)]

    def mi_uncond(self, i: int, j: int) -> float:
        return self.mi_pair[_pair(i, j)]

    def as_dict(self) -> dict:
        d = {f"H(W{i}|W{j},W{k})": self.h_cond[i - 1] for i in USERS for j, k in [_others(i)]}
        for (i, j), v in sorted(self.h_pair_cond.items()):
            k = 6 - i - j
            d[f"H(W{i},W{j}|W{k})"] = v
        for (i, j), v in sorted(self.mi_cond.items()):
            k = 6 - i - j
            d[f"I(W{i};W{j}|W{k})"] = v
        d["I(W1;W2;W3)"] = self.mi_triple
        d["H(W1,W2,W3)"] = self.h_joint
        return d

    @classmethod
    def from_values(
        cls,
        h_cond: Sequence[float],
        mi_cond: Mapping[tuple[int, int], float],
        mi_triple: float = 0.0,
        h_single: Sequence[float] | None = None,
    ) -> "InfoProfile":
        """Build a profile from conditional entropies and conditional MIs alone.

        Pair entropies follow from the chain rule.  Unconditional terms are
        only filled in when ``h_single`` is given; they are not needed by the
        rate bounds, which is what synthetic profiles are used for.
        """
        mi_cond = {_pair(*k): float(v) for k, v in mi_cond.items()}
        h_pair = {(i, j): h_cond[i - 1] + mi_cond[(i, j)] + h_cond[j - 1] for (i, j) in mi_cond}
        mi_pair = {(i, j): mi_cond[(i, j)] + mi_triple for (i, j) in mi_cond}
        h_joint = sum(h_cond) + sum(mi_cond.values()) + mi_triple
        singles = tuple(h_single) if h_single is not None else (math.nan,) * 3
        return cls(tuple(float(x) for x in h_cond), h_pair, mi_cond, float(mi_triple), h_joint, singles, mi_pair)


def _clip(x: float) -> float:
    # rounding can leave -1e-16 on quantities that are nonnegative by definition
    return 0.0 if x < 0 and x > -1e-9 else x


def info_profile(p: JointPmf3) -> InfoProfile:
    """Exact information measures of ``p`` (0 log 0 = 0)."""
    if not isinstance(p, JointPmf3):
        p = JointPmf3(p)
    H = {s: p.entropy(s) for s in [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]}
    h123 = H[(1, 2, 3)]
    h_cond = tuple(_clip(h123 - H[_others(i)]) for i in USERS)
    h_pair_cond, mi_cond, mi_pair = {}, {}, {}
    for i, j in [(1, 2), (1, 3), (2, 3)]:
        k = 6 - i - j
        h_pair_cond[(i, j)] = _clip(h123 - H[(k,)])
        mi_cond[(i, j)] = _clip(H[tuple(sorted((i, k)))] + H[tuple(sorted((j, k)))] - h123 - H[(k,)])
        mi_pair[(i, j)] = _clip(H[(i,)] + H[(j,)] - H[(i, j)])
    mi_triple = mi_pair[(1, 3)] - mi_cond[(1, 3)]
    return InfoProfile(
        h_cond, h_pair_cond, mi_cond, mi_triple, h123, (H[(1,)], H[(2,)], H[(3,)]), mi_pair
    )


# --- component construction -------------------------------------------------


@dataclass(frozen=True)
class Component:
    name: str
    pmf: tuple[float, ...]

    def __post_init__(self):
        pmf = tuple(float(x) for x in self.pmf)
        if not pmf or min(pmf) < 0 or abs(sum(pmf) - 1) > 1e-9:
            raise ValidationError(f"component {self.name!r} has an invalid pmf")
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def uniform_bits(cls, name: str, bits: int) -> "Component":
        return cls(name, (2.0**-bits,) * (2**bits))

    @classmethod
    def bernoulli(cls, name: str, p1: float) -> "Component":
        return cls(name, (1 - p1, p1))


@dataclass(frozen=True)
class UserRule:
    """How one user's symbol is formed from component values."""

    components: tuple[str, ...]
    combine: str = "tuple"
    q: int | None = None

    def __post_init__(self):
        if self.combine not in ("tuple", "xor-mod-q"):
            raise ValidationError(f"unknown combine rule {self.combine!r}")


def pmf_from_components(
    components: Sequence[Component],
    users: Sequence[UserRule],
    cap: int = DEFAULT_COMPONENT_CAP,
) -> JointPmf3:
    """Exact joint pmf of three users built from independent components.

    ``tuple`` users see the mixed-radix index of their component values (first
    listed component most significant); ``xor-mod-q`` users see the sum of the
    values modulo q (default: the largest component alphabet they use).  A user
    with no components is constant.
    """
    if len(users) != 3:
        raise ValidationError("exactly three user rules are required")
    byname = {c.name: c for c in components}
    if len(byname) != len(components):
        raise ValidationError("duplicate component names")
    for u in users:
        for name in u.components:
            if name not in byname:
                raise ValidationError(f"unknown component {name!r}")
    sizes = [len(c.pmf) for c in components]
    total = math.prod(sizes)
    if total > cap:
        raise TooLargeError("component product space", total, cap)

    probs = np.ones(())
    for c in components:
        probs = np.multiply.outer(probs, np.asarray(c.pmf))
    grids = np.indices(sizes, sparse=True) if components else []
    pos = {c.name: i for i, c in enumerate(components)}

    symbols, alph = [], []
    for u in users:
        if not u.components:
            symbols.append(np.zeros((), dtype=np.int64))
            alph.append(1)
            continue
        if u.combine == "tuple":
            sym, size = np.zeros((), dtype=np.int64), 1
            for name in u.components:
                n = sizes[pos[name]]
                sym = sym * n + grids[pos[name]]
                size *= n
        else:
            q = u.q or max(sizes[pos[name]] for name in u.components)
            sym = np.zeros((), dtype=np.int64)
            for name in u.components:
                sym = (sym + grids[pos[name]]) % q
            size = q
        symbols.append(sym)
        alph.append(size)

    shape = tuple(sizes) if components else ()
    flat_idx = np.ravel_multi_index(
        [np.broadcast_to(s, shape).ravel() for s in symbols], alph
    )
    table = np.bincount(flat_idx, weights=np.asarray(probs).ravel(), minlength=math.prod(alph))
    return JointPmf3(table.reshape(alph) / table.sum())


# --- noise -------------------------------------------------------------------


@dataclass(frozen=True)
class NoisePmf:
    """Distribution of additive channel noise over ``[0, len(probs))``."""

    probs: tuple[float, ...]

    def __post_init__(self):
        pr = tuple(float(x) for x in self.probs)
        if not pr or min(pr) < 0 or abs(sum(pr) - 1) > 1e-9:
            raise ValidationError(f"noise pmf {pr} is not a distribution")
        object.__setattr__(self, "probs", pr)

    @property
    def entropy(self) -> float:
        return entropy(np.array(self.probs))

    def padded(self, F: int) -> np.ndarray:
        if len(self.probs) > F:
            if any(self.probs[F:]):
                raise ValidationError(f"noise has mass outside [0, {F})")
            return np.array(self.probs[:F])
        return np.array(self.probs + (0.0,) * (F - len(self.probs)))

    @classmethod
    def zero(cls) -> "NoisePmf":
        return cls((1.0,))

    @classmethod
    def uniform_on(cls, values: Iterable[int], F: int | None = None) -> "NoisePmf":
        vals = list(values)
        size = F if F is not None else max(vals) + 1
        pr = [0.0] * size
        for v in vals:
            pr[v] += 1 / len(vals)
        return cls(tuple(pr))


def noise_entropy(n: NoisePmf) -> float:
    return n.entropy


def binary_entropy(x: float) -> float:
    return entropy(np.array([x, 1 - x]))


