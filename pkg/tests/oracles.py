"""Reference implementations written independently of the package.

They favour obviousness over speed: loops over dictionaries, brute-force
enumeration, textbook definitions.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np


# --- information measures from the definitions ------------------------------------


def _marg(table, axes):
    out = defaultdict(float)
    for idx, pr in np.ndenumerate(table):
        if pr > 0:
            out[tuple(idx[a] for a in axes)] += pr
    return out


def cond_entropy(table, target, given) -> float:
    """H(target | given) = -sum p(t, g) log p(t, g) / p(g)."""
    joint = _marg(table, tuple(target) + tuple(given))
    cond = _marg(table, tuple(given))
    h = 0.0
    for key, pr in joint.items():
        g = key[len(target):]
        h -= pr * math.log2(pr / cond[g])
    return h


def cond_mi(table, a, b, given) -> float:
    """I(A;B|G) = sum p(a,b,g) log p(a,b,g) p(g) / (p(a,g) p(b,g))."""
    abg = _marg(table, (a, b) + tuple(given))
    ag = _marg(table, (a,) + tuple(given))
    bg = _marg(table, (b,) + tuple(given))
    g = _marg(table, tuple(given))
    total = 0.0
    for (x, y, *rest), pr in abg.items():
        rest = tuple(rest)
        total += pr * math.log2(pr * g[rest] / (ag[(x,) + rest] * bg[(y,) + rest]))
    return total


def profile_oracle(table) -> dict:
    """The ten measures, keyed like ``InfoProfile.as_dict``, 0-based axes."""
    d = {}
    for i in range(3):
        j, k = (x for x in range(3) if x != i)
        d[f"H(W{i+1}|W{j+1},W{k+1})"] = cond_entropy(table, (i,), (j, k))
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        k = 3 - i - j
        d[f"H(W{i+1},W{j+1}|W{k+1})"] = cond_entropy(table, (i, j), (k,))
        d[f"I(W{i+1};W{j+1}|W{k+1})"] = cond_mi(table, i, j, (k,))
    d["I(W1;W2;W3)"] = cond_mi(table, 0, 2, ()) - cond_mi(table, 0, 2, (1,))
    d["H(W1,W2,W3)"] = cond_entropy(table, (0, 1, 2), ())
    return d


# --- finite fields via polynomial arithmetic -------------------------------------


def poly_mul_mod(a: int, b: int, p: int, k: int, poly) -> int:
    """Multiply two elements given as base-p digit integers, reducing by ``poly``."""
    da = [(a // p**i) % p for i in range(k)]
    db = [(b // p**i) % p for i in range(k)]
    prod = [0] * (2 * k - 1)
    for i, x in enumerate(da):
        for j, y in enumerate(db):
            prod[i + j] = (prod[i + j] + x * y) % p
    # long division by the monic modulus
    for deg in range(2 * k - 2, k - 1, -1):
        c = prod[deg]
        if c:
            for t in range(k + 1):
                prod[deg - k + t] = (prod[deg - k + t] - c * poly[t]) % p
    return sum(prod[i] * p**i for i in range(k))


def poly_add(a: int, b: int, p: int, k: int) -> int:
    return sum((((a // p**i) + (b // p**i)) % p) * p**i for i in range(k))


# --- SW/FDF-IS feasibility by grid search ------------------------------------------


def grid_feasible(kappa, hc, hp, denom, log_f, steps=60) -> bool:
    """Search a grid of (R1, R2, R3) in (0, log F]^3 for a strictly feasible point.

    ``hc[i]`` = H(Wi|Wj,Wk), ``hp[(i, j)]`` = H(Wi,Wj|Wk), ``denom[i]`` =
    log F - max(H(N0), H(Ni)) for 0-based users.
    """
    g = np.linspace(log_f / steps, log_f, steps)
    r1, r2, r3 = np.meshgrid(g, g, g, indexing="ij")
    R = [r1, r2, r3]
    ok = np.ones_like(r1, dtype=bool)
    for i in range(3):
        ok &= kappa * R[i] > hc[i]
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        k = 3 - i - j
        ok &= kappa * (R[i] + R[j]) > hp[(i, j)]
        ok &= R[i] + R[j] < denom[k]
    return bool(ok.any())


# --- common parts by exhaustive partition search -----------------------------------


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def gk_entropy_oracle(table, users) -> float:
    """Largest H(f(W_u)) over partitions f of W_u's support that every other
    user in ``users`` can compute (each of its symbols co-occurs with one block only)."""
    base, others = users[0], users[1:]
    marg_b = table.sum(axis=tuple(a for a in range(3) if a != base))
    support = [w for w in range(table.shape[base]) if marg_b[w] > 0]
    best = 0.0
    for part in set_partitions(support):
        block = {w: bi for bi, blk in enumerate(part) for w in blk}
        ok = True
        for o in others:
            drop = tuple(a for a in range(3) if a not in (base, o))
            pair = table.sum(axis=drop)
            if base > o:
                pair = pair.T
            for wo in range(table.shape[o]):
                blocks = {block[wb] for wb in support if pair[wb, wo] > 0}
                if len(blocks) > 1:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            probs = [sum(marg_b[w] for w in blk) for blk in part]
            best = max(best, -sum(p * math.log2(p) for p in probs if p > 0))
    return best


# --- misc --------------------------------------------------------------------------


def naive_mat_vec(c, G, add, mul, zero=0):
    out = []
    for col in range(len(G[0])):
        acc = zero
        for r in range(len(c)):
            acc = add(acc, mul(c[r], G[r][col]))
        out.append(acc)
    return out


def all_blocks(alphabet: int, m: int):
    return itertools.product(range(alphabet), repeat=m)
