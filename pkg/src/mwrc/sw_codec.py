"""Desk-scale distributed source codecs.

Two codecs live here:

* random binning of whole message blocks (the Slepian–Wolf code used by the
  separation scheme), with dithering of the bin index;
* the common-part codec, where each user describes its private part and the
  Gács–Körner common parts it shares as separate finite-field subcodes.

Both decode by exhaustive maximum likelihood over the candidate blocks that
agree with the received bin indices and the decoder's own message; ties go
to the lexicographically smallest candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import CommonParts
from .errors import DomainError, InvalidClassError, TooLargeError, ValidationError
from .sources import InfoProfile, JointPmf3

HASH_PRIME = 2**31 - 1
BLOCK_CAP = 2**24
PAIR_CAP = 2**24
USERS = (1, 2, 3)
SUBCODES = ("1", "2", "3", "12", "13", "23", "123")


def block_index(block, radix: int) -> int | np.ndarray:
    """Mixed-radix integer of a block (first symbol most significant).

    Accepts a single block (1-d) or a batch (2-d, one block per row).
    """
    b = np.asarray(block, dtype=np.int64)
    weights = radix ** np.arange(b.shape[-1] - 1, -1, -1, dtype=np.int64)
    out = b @ weights
    return int(out) if b.ndim == 1 else out


def index_digits(x, base: int, length: int) -> np.ndarray:
    """Inverse of :func:`block_index`; vectorised over ``x``."""
    x = np.asarray(x, dtype=np.int64)
    out = np.empty(x.shape + (length,), dtype=np.int64)
    for t in range(length - 1, -1, -1):
        out[..., t] = x % base
        x = x // base
    return out


@dataclass(frozen=True)
class BinHash:
    """Seeded binning of ``[0, n_inputs)`` into ``[0, n_bins)``.

    When there are at least as many bins as inputs the map is an affine
    bijection of the input range, so binning is injective; otherwise it is
    the universal family ((a x + b) mod P) mod n_bins.
    """

    n_inputs: int
    n_bins: int
    seed: int
    salt: int = 0
    a: int = field(init=False)
    b: int = field(init=False)

    def __post_init__(self):
        if self.n_bins < 1 or self.n_inputs < 1:
            raise ValidationError("bin and input counts must be positive")
        if self.n_inputs > BLOCK_CAP:
            raise TooLargeError("binning input space", self.n_inputs, BLOCK_CAP)
        rng = np.random.default_rng([self.seed, self.salt, 0x5B1])
        if self.injective:
            n = self.n_inputs
            a = int(rng.integers(1, max(n, 2)))
            while math.gcd(a, n) != 1:
                a = a % n + 1
            b = int(rng.integers(0, n))
        else:
            a = int(rng.integers(1, HASH_PRIME))
            b = int(rng.integers(0, HASH_PRIME))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def injective(self) -> bool:
        return self.n_bins >= self.n_inputs

    def __call__(self, x):
        x = np.asarray(x, dtype=np.int64)
        if self.injective:
            out = (self.a * x + self.b) % self.n_inputs
        else:
            out = ((self.a * x + self.b) % HASH_PRIME) % self.n_bins
        return int(out) if out.ndim == 0 else out


# --- Slepian–Wolf binning ----------------------------------------------------------


@dataclass(frozen=True)
class BinCode:
    """Per-user random binning of length-``m`` blocks into ``M[i-1]`` bins."""

    m: int
    M: tuple[int, int, int]
    alphabet: tuple[int, int, int]
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("block length must be >= 1")
        if len(self.M) != 3 or min(self.M) < 1:
            raise ValidationError("bin counts must be three integers >= 1")

    def hasher(self, user: int) -> BinHash:
        return _bin_hash(self.alphabet[user - 1] ** self.m, self.M[user - 1], self.seed, user)


_HASH_CACHE: dict = {}


def _bin_hash(n_inputs, n_bins, seed, salt) -> BinHash:
    key = (n_inputs, n_bins, seed, salt)
    if key not in _HASH_CACHE:
        _HASH_CACHE[key] = BinHash(n_inputs, n_bins, seed, salt)
    return _HASH_CACHE[key]


def sw_encode(w, user: int, code: BinCode) -> int:
    w = np.asarray(w, dtype=np.int64)
    if w.shape != (code.m,):
        raise ValidationError(f"block of shape {w.shape}, expected ({code.m},)")
    return code.hasher(user)(block_index(w, code.alphabet[user - 1]))


def dither_index(v: int, d: int, M: int) -> int:
    if not (0 <= v < M and 0 <= d < M):
        raise DomainError(f"index {v} or dither {d} outside [0, {M})")
    return (v + d) % M


def undither_index(v: int, d: int, M: int) -> int:
    if not (0 <= v < M and 0 <= d < M):
        raise DomainError(f"index {v} or dither {d} outside [0, {M})")
    return (v - d) % M


def check_sw_rates(M, m: int, ip: InfoProfile) -> bool:
    """Strict Slepian–Wolf conditions for the bin counts ``M = (M1, M2, M3)``."""
    logs = [math.log2(x) / m for x in M]
    for i in USERS:
        j, k = (u for u in USERS if u != i)
        if not logs[i - 1] > ip.h_given_others(i):
            return False
        if not logs[j - 1] + logs[k - 1] > ip.h_pair(j, k):
            return False
    return True


# --- ML search --------------------------------------------------------------------


def _log_table(p: JointPmf3) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log2(p.table)


def _product_blocks(cands: list[np.ndarray], radix: int, cap: int) -> tuple[np.ndarray, np.ndarray]:
    """All blocks whose t-th symbol lies in ``cands[t]``, in lexicographic order."""
    size = math.prod(len(c) for c in cands)
    if size > cap:
        raise TooLargeError("candidate blocks", size, cap)
    if size == 0:
        return np.zeros((0, len(cands)), dtype=np.int64), np.zeros(0, dtype=np.int64)
    grids = np.meshgrid(*cands, indexing="ij")
    digits = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    return digits, block_index(digits, radix)


def _best_pair(logp_ijk: np.ndarray, wi: np.ndarray, dj: np.ndarray, dk: np.ndarray,
               pair_ok: np.ndarray | None = None):
    """Index pair maximising sum_t log p(wi[t], wj[t], wk[t]); lexicographic ties."""
    if len(dj) == 0 or len(dk) == 0:
        return None
    if len(dj) * len(dk) > PAIR_CAP:
        raise TooLargeError("candidate pairs", len(dj) * len(dk), PAIR_CAP)
    score = np.zeros((len(dj), len(dk)))
    for t in range(len(wi)):
        score += logp_ijk[wi[t]][dj[:, t][:, None], dk[:, t][None, :]]
    if pair_ok is not None:
        score = np.where(pair_ok, score, -np.inf)
    if not np.isfinite(score.max()):
        return None
    score = np.round(score, 9)
    flat = int(np.argmax(score))
    return divmod(flat, len(dk))


def _user_axes(p: JointPmf3, i: int) -> tuple[int, int, np.ndarray]:
    j, k = (u for u in USERS if u != i)
    logp = np.transpose(_log_table(p), [i - 1, j - 1, k - 1])
    return j, k, logp


def sw_decode(vj: int, vk: int, wi, user: int, p: JointPmf3, code: BinCode,
              cap: int = BLOCK_CAP):
    """Recover the other two users' blocks from their (undithered) bin indices.

    Returns ``(w_j, w_k)`` for the two other users in increasing user order,
    or None when no candidate is consistent.
    """
    wi = np.asarray(wi, dtype=np.int64)
    if wi.shape != (code.m,):
        raise ValidationError(f"block of shape {wi.shape}, expected ({code.m},)")
    j, k, logp = _user_axes(p, user)
    pos_ij = p.marginal([user, j]) if user < j else p.marginal([user, j]).T
    pos_ik = p.marginal([user, k]) if user < k else p.marginal([user, k]).T
    cj = [np.flatnonzero(pos_ij[s] > 0) for s in wi]
    ck = [np.flatnonzero(pos_ik[s] > 0) for s in wi]
    dj, xj = _product_blocks(cj, code.alphabet[j - 1], cap)
    dk, xk = _product_blocks(ck, code.alphabet[k - 1], cap)
    sel_j = code.hasher(j)(xj) == vj if len(xj) else np.zeros(0, bool)
    sel_k = code.hasher(k)(xk) == vk if len(xk) else np.zeros(0, bool)
    dj, dk = dj[sel_j], dk[sel_k]
    best = _best_pair(logp, wi, dj, dk)
    if best is None:
        return None
    return dj[best[0]], dk[best[1]]


# --- common-part subcodes ------------------------------------------------------------


@dataclass(frozen=True)
class SubcodeLengths:
    """Lengths (in field symbols) of the seven subcodes."""

    l1: int
    l2: int
    l3: int
    l12: int
    l13: int
    l23: int
    l123: int = 0

    def __post_init__(self):
        if min(self.as_dict().values()) < 0:
            raise ValidationError(f"negative subcode length in {self}")

    def __getitem__(self, name: str) -> int:
        return getattr(self, "l" + name)

    def as_dict(self) -> dict[str, int]:
        return {s: getattr(self, "l" + s) for s in SUBCODES}

    @property
    def lT(self) -> int:
        return self.l1 + self.l12 + self.l2

    @property
    def ordered(self) -> bool:
        return self.lT >= max(self.l2 + self.l23 + self.l3, self.l1 + self.l13 + self.l3)

    @property
    def branch(self) -> int:
        """1 for the layout used when l12 <= l3, 2 otherwise."""
        return 1 if self.l12 <= self.l3 else 2


def canonical_order(ip: InfoProfile) -> tuple[int, int, int]:
    """Permutation putting the pair with the largest conditional joint entropy first.

    Returned as ``order`` for :meth:`JointPmf3.permute`; ties keep the
    original labels where possible.
    """
    best = max([(1, 2), (1, 3), (2, 3)], key=lambda pr: (ip.h_pair(*pr) + 1e-12 * (pr == (1, 2))))
    k = 6 - sum(best)
    return (best[0], best[1], k)


def _window_length(target: float, m: int, log_f: float, theta: float, name: str, tol: float) -> int:
    if target <= tol:
        return 0
    ell = math.floor(target * m / log_f) + 1
    if not ell * log_f / m < target + theta:
        raise ValidationError(
            f"no integer length for c{name} in ({target:.4g}, {target + theta:.4g}) at m={m}; use a larger m or theta")
    return ell


def gk_subcode_lengths(ip: InfoProfile, m: int, F: int, theta: float, tol: float = 1e-9) -> SubcodeLengths:
    """Smallest subcode lengths with l log F / m just above each target rate.

    Targets: H(Wi|Wj,Wk) for the private subcodes, I(Wi;Wj|Wk) for the pair
    subcodes and I(W1;W2;W3) for the common subcode.  A zero target gets
    length 0.  The users must already be ordered so that H(W1,W2|W3) is the
    largest pair entropy; if rounding then breaks the uplink ordering
    condition, l12 is raised until it holds.
    """
    if theta <= 0:
        raise DomainError("theta must be positive")
    if ip.mi_triple < -tol:
        raise InvalidClassError("I(W1;W2;W3) < 0: common information cannot equal mutual information")
    if ip.h_pair(1, 2) + tol < max(ip.h_pair(1, 3), ip.h_pair(2, 3)):
        raise ValidationError("users not ordered: permute with canonical_order() first")
    log_f = math.log2(F)
    ls = {}
    for i in USERS:
        ls[str(i)] = _window_length(ip.h_given_others(i), m, log_f, theta, str(i), tol)
    for i, j in [(1, 2), (1, 3), (2, 3)]:
        ls[f"{i}{j}"] = _window_length(ip.mi(i, j), m, log_f, theta, f"{i}{j}", tol)
    ls["123"] = _window_length(max(ip.mi_triple, 0.0), m, log_f, theta, "123", tol)
    return _fix_order(SubcodeLengths(*(ls[s] for s in SUBCODES)))


def injective_lengths(p: JointPmf3, parts: CommonParts, m: int, F: int) -> SubcodeLengths:
    """Lengths at which every subcode bins its residual injectively (lossless at any m)."""
    _, radix = _residuals(p, parts)
    ls = {s: math.ceil(m * math.log(radix[s]) / math.log(F) - 1e-12) if radix[s] > 1 else 0
          for s in SUBCODES}
    return _fix_order(SubcodeLengths(*(ls[s] for s in SUBCODES)))


def _fix_order(lens: SubcodeLengths) -> SubcodeLengths:
    deficit = max(lens.l2 + lens.l23 + lens.l3, lens.l1 + lens.l13 + lens.l3) - lens.lT
    if deficit <= 0:
        return lens
    return SubcodeLengths(lens.l1, lens.l2, lens.l3, lens.l12 + deficit, lens.l13, lens.l23, lens.l123)


HOLDERS = {"1": (1,), "2": (2,), "3": (3,), "12": (1, 2), "13": (1, 3), "23": (2, 3), "123": (1, 2, 3)}


def _class_ranks(keys: np.ndarray) -> tuple[np.ndarray, int]:
    """Rank of each entry among the entries sharing its key, and the largest class size."""
    ranks = np.zeros(len(keys), dtype=np.int64)
    seen: dict = {}
    for idx, key in enumerate(map(tuple, keys)):
        ranks[idx] = seen.get(key, 0)
        seen[key] = ranks[idx] + 1
    return ranks, max(seen.values(), default=1)


def _residuals(p: JointPmf3, parts: CommonParts):
    """Per-subcode residual maps ``rank[s][user][symbol]`` and their radices."""
    lab = parts.labels
    rank: dict[str, dict[int, np.ndarray]] = {}
    radix: dict[str, int] = {}
    for i in USERS:
        j, k = (u for u in USERS if u != i)
        keys = np.stack([lab[_pair(i, j)][i], lab[_pair(i, k)][i]], axis=1)
        ranks, radix[str(i)] = _class_ranks(keys)
        rank[str(i)] = {i: ranks}
    for s in ("12", "13", "23"):
        u = int(s[0])
        top = np.full(parts.sizes[s], -1, dtype=np.int64)
        ok = lab[s][u] >= 0
        top[lab[s][u][ok]] = lab["123"][u][ok]
        ranks, radix[s] = _class_ranks(top[:, None])
        rank[s] = {v: ranks[np.maximum(lab[s][v], 0)] for v in (int(c) for c in s)}
        rank[s][0] = ranks
    radix["123"] = parts.sizes["123"]
    rank["123"] = {v: np.maximum(lab["123"][v], 0) for v in USERS}
    return rank, radix


class GKSourceCode:
    """Subcode encoder/decoder built on common-part labelings.

    Every subcode bins a conditional residual rather than a raw block:

    * ``c_i`` bins the rank of each symbol of W_i among the symbols sharing
      its pair common-part labels;
    * ``c_ij`` bins the rank of each V_ij label among the labels sharing its
      V_123 label;
    * ``c_123`` bins the V_123 labels themselves.

    Given the labels a decoder already knows or is testing, the residual
    pins down the block, so this is random binning of exactly the
    information the subcode has to carry.  Holders of a shared subcode
    compute it identically.  Bin indices are written as base-F digit
    vectors of the subcode length.
    """

    def __init__(self, p: JointPmf3, parts: CommonParts, lens: SubcodeLengths, F: int, m: int,
                 seed: int = 0, cap: int = BLOCK_CAP):
        self.p, self.parts, self.lens, self.F, self.m, self.seed = p, parts, lens, F, m, seed
        self.cap = cap
        self.logp = _log_table(p)
        self._rank, radix = _residuals(p, parts)
        self._hash = {}
        for idx, s in enumerate(SUBCODES):
            n_in = radix[s] ** m
            if n_in > cap:
                raise TooLargeError(f"residual space of subcode c{s}", n_in, cap)
            self._hash[s] = (radix[s], _bin_hash(n_in, F ** lens[s], seed, 100 + idx))

    def bin_of(self, s: str, user: int, w: np.ndarray):
        """Bin index of subcode ``s`` computed by ``user`` from its block(s) ``w``."""
        radix, h = self._hash[s]
        return h(block_index(self._rank[s][user][np.asarray(w)], radix))

    def to_vector(self, s: str, index: int) -> np.ndarray:
        return index_digits(index, self.F, self.lens[s])

    def from_vector(self, vec) -> int:
        return block_index(np.asarray(vec, dtype=np.int64), self.F) if len(vec) else 0

    def encode(self, blocks: np.ndarray) -> dict[str, np.ndarray]:
        """Subcode vectors from the three users' blocks (shape (3, m)).

        Shared subcodes are computed from every holder and must agree.
        """
        blocks = np.asarray(blocks, dtype=np.int64)
        out = {}
        for s in SUBCODES:
            values = {self.bin_of(s, u, blocks[u - 1]) for u in HOLDERS[s]}
            if len(values) != 1:
                raise ValidationError(f"holders of c{s} disagree: common-part labels are inconsistent")
            out[s] = self.to_vector(s, values.pop())
        return out

    def decode(self, user: int, own: np.ndarray, received: dict[str, np.ndarray]):
        """ML estimate of the other two users' blocks.

        ``received`` must contain the subcodes this user does not hold
        (private subcodes of the others and their shared pair subcode).
        Returns ``(w_j, w_k)`` in increasing user order, or None.
        """
        own = np.asarray(own, dtype=np.int64)
        j, k = (u for u in USERS if u != user)
        pj, pk, jk = _pair(user, j), _pair(user, k), f"{j}{k}"
        lab = self.parts.labels
        known = {j: lab[pj][user][own], k: lab[pk][user][own]}
        known_all = lab["123"][user][own]
        if min(known[j].min(), known[k].min(), known_all.min()) < 0:
            return None
        want = {s: self.from_vector(received[s]) for s in (str(j), str(k), jk)}

        def allowed(v: int, pair: str):
            return [np.flatnonzero((lab[pair][v] == known[v][t]) & (lab["123"][v] == known_all[t])
                                   & (lab[jk][v] >= 0)) for t in range(self.m)]

        per_pos = {j: allowed(j, pj), k: allowed(k, pk)}
        # label sequences of the shared part V_jk, filtered by c_jk first
        shared = [np.intersect1d(lab[jk][j][per_pos[j][t]], lab[jk][k][per_pos[k][t]]) for t in range(self.m)]
        seqs, _ = _product_blocks(shared, max(self.parts.sizes[jk], 1), self.cap)
        if len(seqs):
            radix, h = self._hash[jk]
            seqs = seqs[h(block_index(self._rank[jk][0][seqs], radix)) == want[jk]]

        def expand(v: int, seq: np.ndarray):
            cands = [c[lab[jk][v][c] == seq[t]] for t, c in enumerate(per_pos[v])]
            d, _ = _product_blocks(cands, self.p.shape[v - 1], self.cap)
            if len(d):
                radix, h = self._hash[str(v)]
                d = d[h(block_index(self._rank[str(v)][v][d], radix)) == want[str(v)]]
            return d

        dj, dk, gj, gk = [], [], [], []
        for g, seq in enumerate(seqs):
            a, b = expand(j, seq), expand(k, seq)
            if len(a) and len(b):
                dj.append(a), dk.append(b)
                gj.append(np.full(len(a), g)), gk.append(np.full(len(b), g))
        if not dj:
            return None
        # lexicographic candidate order keeps tie-breaking independent of the grouping
        dj, gj = _lex_sorted(np.concatenate(dj), np.concatenate(gj), self.p.shape[j - 1])
        dk, gk = _lex_sorted(np.concatenate(dk), np.concatenate(gk), self.p.shape[k - 1])
        same_jk = gj[:, None] == gk[None, :]
        logp = np.transpose(self.logp, [user - 1, j - 1, k - 1])
        best = _best_pair(logp, own, dj, dk, same_jk)
        if best is None:
            return None
        return dj[best[0]], dk[best[1]]


def _lex_sorted(blocks: np.ndarray, groups: np.ndarray, radix: int):
    order = np.argsort(block_index(blocks, radix), kind="stable")
    return blocks[order], groups[order]


def _pair(a: int, b: int) -> str:
    return f"{min(a, b)}{max(a, b)}"


def gk_source_encode(blocks, code: GKSourceCode) -> dict[str, np.ndarray]:
    return code.encode(blocks)


def gk_source_decode(user: int, own, received: dict[str, np.ndarray], code: GKSourceCode):
    return code.decode(user, own, received)
