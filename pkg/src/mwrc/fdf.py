"""Functional-decode-forward channel coding and the end-to-end pipelines.

Uplink: every user sends ``x = (c ⊙ G) ⊕ q_user`` per column, the relay
decodes the field sum of the column messages by exhaustive ML.  Downlink:
the relay broadcasts the concatenated sums with a random codebook, and each
user decodes by ML over the codewords consistent with what it already knows.
Users then peel the missing subcodes out of the sums and run the source
decoder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import sw_codec
from .channel import ChannelState, downlink, uplink
from .classify import classify
from .errors import InvalidClassError, TooLargeError, ValidationError
from .gf import GF, FieldSpec, get_field
from .rates import ChannelSpec, case1_rates, case2_rates, kappa_with_margin, phi
from .sources import InfoProfile, JointPmf3, info_profile
from .sw_codec import HOLDERS, SUBCODES, SubcodeLengths, block_index, index_digits

SEARCH_CAP = 2**16
LOG_FLOOR = -1e6
SCORE_DECIMALS = 6
_BATCH = 64


def _field(ch_or_spec) -> GF:
    spec = ch_or_spec.field if isinstance(ch_or_spec, ChannelSpec) else ch_or_spec
    if spec is None:
        raise ValidationError("the channel codes need a finite field; F is not a prime power field here")
    return get_field(spec)


def _log_noise(noise, q: int) -> np.ndarray:
    """log2 of a noise pmf (NoisePmf or array) padded to q symbols; zeros map to a finite floor."""
    pmf = np.asarray(getattr(noise, "probs", noise), dtype=float)
    if len(pmf) > q:
        raise ValidationError(f"noise pmf has {len(pmf)} entries for a field of {q} elements")
    out = np.full(q, LOG_FLOOR)
    pos = np.flatnonzero(pmf > 0)
    out[pos] = np.log2(pmf[pos])
    return out


def _one_hot(words: np.ndarray, q: int) -> np.ndarray:
    """(S, n) symbols -> (S, n*q) indicator matrix matching ``LL.reshape(-1)``."""
    s, n = words.shape
    oh = np.zeros((s, n * q), dtype=np.float64)
    cols = np.arange(n) * q + words.astype(np.int64)
    oh[np.arange(s)[:, None], cols] = 1.0
    return oh


def _argmax_first(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax after rounding, so ties go to the lowest index."""
    return np.argmax(np.round(scores, SCORE_DECIMALS), axis=-1)


def _loglik(y: np.ndarray, gf: GF, logn: np.ndarray) -> np.ndarray:
    """LL[..., t, a] = log p_N(y_t ⊖ a)."""
    a = np.arange(gf.order)
    return logn[gf.sub(y[..., None], a)]


def all_messages(q: int, ell: int) -> np.ndarray:
    """Every vector of F^ell, in lexicographic order (first coordinate most significant)."""
    size = q**ell
    if size > SEARCH_CAP:
        raise TooLargeError("exhaustive search space F^l", size, SEARCH_CAP)
    return index_digits(np.arange(size), q, ell)


# --- uplink linear codes -------------------------------------------------------------


@dataclass(frozen=True)
class LinearCode:
    """Generator matrix G (ell x n) and one dither per user, all over one field."""

    field: FieldSpec
    G: np.ndarray
    dithers: np.ndarray
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        G = np.asarray(self.G)
        d = np.asarray(self.dithers)
        if G.ndim != 2 or d.shape != (3, G.shape[1]):
            raise ValidationError(f"G is {G.shape} but dithers are {d.shape}; need (3, n)")
        get_field(self.field)._check(G, d)

    @property
    def ell(self) -> int:
        return self.G.shape[0]

    @property
    def n(self) -> int:
        return self.G.shape[1]

    @classmethod
    def random(cls, spec: FieldSpec, ell: int, n: int, rng: np.random.Generator,
               full_rank: bool = True, max_tries: int = 1000) -> "LinearCode":
        """Uniform G and dithers; G is redrawn until it has full row rank when that is possible."""
        gf = get_field(spec)
        G = gf.random(rng, (ell, n))
        if full_rank and 0 < ell <= n:
            for _ in range(max_tries):
                if gf.rank(G) == ell:
                    break
                G = gf.random(rng, (ell, n))
        return cls(spec, G, gf.random(rng, (3, n)))

    def codewords(self) -> np.ndarray:
        """s ⊙ G for every message s, in lexicographic order of s."""
        if "words" not in self._cache:
            gf = get_field(self.field)
            msgs = all_messages(gf.order, self.ell)
            if self.ell == 0:
                words = np.zeros((1, self.n), dtype=gf.dtype)
            else:
                words = gf.matmul(msgs, self.G)
            self._cache["msgs"] = msgs
            self._cache["words"] = words
            self._cache["onehot"] = _one_hot(words, gf.order)
        return self._cache["words"]


def lbc_encode(c, code: LinearCode, user: int) -> np.ndarray:
    """x = (c ⊙ G) ⊕ q_user."""
    gf = get_field(code.field)
    c = np.asarray(getattr(c, "values", c), dtype=np.int64)
    if c.shape != (code.ell,):
        raise ValidationError(f"message of length {c.shape} for a code with ell={code.ell}")
    if user not in (1, 2, 3):
        raise ValidationError(f"invalid user index {user}")
    gf._check(c)
    if code.ell == 0:
        return code.dithers[user - 1].astype(np.int64)
    return gf.add(gf.matmul(c, code.G), code.dithers[user - 1]).astype(np.int64)


def relay_decode_sum(y0, code: LinearCode, noise) -> np.ndarray:
    """ML estimate of c1 ⊕ c2 ⊕ c3 from the relay's received word(s).

    ``y0`` may be one word (n,) or a batch (T, n); ``noise`` is the uplink
    noise pmf over the field.  Ties resolve to the lexicographically
    smallest sum.
    """
    gf = get_field(code.field)
    y0 = np.asarray(y0, dtype=np.int64)
    if y0.shape[-1] != code.n:
        raise ValidationError(f"received {y0.shape[-1]} symbols, code length is {code.n}")
    code.codewords()
    msgs, oh = code._cache["msgs"], code._cache["onehot"]
    if code.ell == 0:
        return np.zeros(y0.shape[:-1] + (0,), dtype=np.int64)
    qsum = gf.sum(code.dithers, axis=0)
    z = gf.sub(y0, qsum)
    logn = _log_noise(noise, gf.order)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    out = np.empty((len(z), code.ell), dtype=np.int64)
    for lo in range(0, len(z), _BATCH):
        ll = _loglik(z[lo:lo + _BATCH], gf, logn).reshape(len(z[lo:lo + _BATCH]), -1)
        out[lo:lo + _BATCH] = msgs[_argmax_first(ll @ oh.T)]
    return out[0] if single else out


# --- downlink random codebook ----------------------------------------------------------


@dataclass(frozen=True)
class DownlinkCodebook:
    """F^ell seeded uniform codewords of length n, indexed by the message digits.

    Codewords are made distinct by redrawing repeats whenever F^n allows it.
    """

    field: FieldSpec
    ell: int
    n: int
    seed: int = 0
    words: np.ndarray = field(init=False, repr=False, compare=False)
    onehot: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gf = get_field(self.field)
        size = gf.order**self.ell
        if size > SEARCH_CAP:
            raise TooLargeError("downlink codebook F^lT", size, SEARCH_CAP)
        rng = np.random.default_rng([self.seed, 0xD0, self.ell, self.n])
        words = rng.integers(0, gf.order, size=(size, self.n))
        if self.n >= self.ell:
            packed = self.n * math.log2(gf.order) < 62
            for _ in range(1000):
                keys = block_index(words, gf.order) if packed else words
                _, first = np.unique(keys, axis=0 if not packed else None, return_index=True)
                dup = np.setdiff1d(np.arange(size), first)
                if len(dup) == 0:
                    break
                words[dup] = rng.integers(0, gf.order, size=(len(dup), self.n))
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "onehot", _one_hot(words, gf.order))


def downlink_encode(cT, book: DownlinkCodebook) -> np.ndarray:
    cT = np.asarray(cT, dtype=np.int64)
    if cT.shape != (book.ell,):
        raise ValidationError(f"message of length {cT.shape}, codebook expects {book.ell}")
    return book.words[block_index(cT, get_field(book.field).order) if book.ell else 0]


def downlink_decode(yi, book: DownlinkCodebook, noise, known_mask=None, known_values=None) -> np.ndarray:
    """ML estimate of cT among codewords agreeing with the known coordinates.

    ``known_mask`` is a boolean vector over the ell positions and
    ``known_values`` the values at the masked positions (in order).
    """
    gf = get_field(book.field)
    q = gf.order
    yi = np.asarray(yi, dtype=np.int64)
    if yi.shape != (book.n,):
        raise ValidationError(f"received {yi.shape} symbols, codebook length is {book.n}")
    mask = np.zeros(book.ell, bool) if known_mask is None else np.asarray(known_mask, bool)
    if mask.shape != (book.ell,):
        raise ValidationError("side-information mask has the wrong length")
    vals = np.asarray([] if known_values is None else known_values, dtype=np.int64)
    if vals.shape != (int(mask.sum()),):
        raise ValidationError("side information must give one value per known position")
    gf._check(vals)
    logn = _log_noise(noise, q)
    ll = _loglik(yi, gf, logn).reshape(-1)
    free = np.flatnonzero(~mask)
    weights = q ** np.arange(book.ell - 1, -1, -1, dtype=np.int64)
    base = int(vals @ weights[mask]) if len(vals) else 0
    if len(free) == 0:
        return index_digits(base, q, book.ell)
    if len(free) == book.ell:
        idx = np.arange(q**book.ell)
        scores = book.onehot @ ll
    else:
        idx = base + all_messages(q, len(free)) @ weights[free]
        scores = book.onehot[idx] @ ll
    return index_digits(idx[_argmax_first(scores)], q, book.ell)


# --- uplink schedules ------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """``length`` symbols of subcode ``subcode`` from ``offset``, sent by ``user``.

    Segments start at the beginning of their column; a segment shorter
    than the column is zero padded.
    """

    subcode: str
    offset: int
    length: int
    user: int


@dataclass(frozen=True)
class Column:
    length: int
    uses: int
    segments: tuple[Segment, ...]


@dataclass(frozen=True)
class Schedule:
    branch: int
    lens: SubcodeLengths
    n: int
    columns: tuple[Column, ...]

    @property
    def lT(self) -> int:
        return sum(c.length for c in self.columns)

    @property
    def starts(self) -> list[int]:
        return list(np.cumsum([0] + [c.length for c in self.columns])[:-1])

    def contributors(self) -> list[list[tuple[str, int]]]:
        """For every position of cT, the subcode elements summed into it."""
        out = []
        for col in self.columns:
            for t in range(col.length):
                out.append([(s.subcode, s.offset + t) for s in col.segments if t < s.length])
        return out

    def column_messages(self, subcodes: dict[str, np.ndarray], gf: GF) -> list[np.ndarray]:
        """Per column, the (3, length) messages each user encodes (sum of its segments)."""
        out = []
        for col in self.columns:
            msg = np.zeros((3, col.length), dtype=np.int64)
            for s in col.segments:
                part = np.asarray(subcodes[s.subcode][s.offset:s.offset + s.length], dtype=np.int64)
                msg[s.user - 1, :s.length] = gf.add(msg[s.user - 1, :s.length], part)
            out.append(msg)
        return out

    def sum_vector(self, subcodes: dict[str, np.ndarray], gf: GF) -> np.ndarray:
        """The vector cT the relay is meant to decode."""
        parts = [gf.sum(m, axis=0) for m in self.column_messages(subcodes, gf)]
        return np.concatenate(parts).astype(np.int64) if parts else np.zeros(0, np.int64)

    def known_mask(self, user: int) -> np.ndarray:
        return np.array([all(user in HOLDERS[s] for s, _ in c) for c in self.contributors()], dtype=bool)

    def known_values(self, user: int, own: dict[str, np.ndarray], gf: GF) -> np.ndarray:
        vals = []
        for contrib, known in zip(self.contributors(), self.known_mask(user)):
            if known:
                vals.append(int(gf.sum(np.array([own[s][e] for s, e in contrib] or [0]), axis=0)))
        return np.array(vals, dtype=np.int64)

    def recover(self, user: int, cT, own: dict[str, np.ndarray], gf: GF) -> dict[str, np.ndarray] | None:
        """All transmitted subcodes from cT and the user's own subcodes, by peeling.

        Repeatedly solves any position of cT with a single unknown element.
        Returns None if some element cannot be determined.
        """
        cT = np.asarray(cT, dtype=np.int64)
        value = {(s, e): int(v) for s in SUBCODES if user in HOLDERS[s] for e, v in enumerate(own[s])}
        eqs = [(int(cT[t]), contrib) for t, contrib in enumerate(self.contributors())]
        progress = True
        while progress:
            progress = False
            for rhs, contrib in eqs:
                unknown = [x for x in contrib if x not in value]
                if len(unknown) != 1:
                    continue
                acc = rhs
                for x in contrib:
                    if x in value:
                        acc = int(gf.sub(acc, value[x]))
                value[unknown[0]] = acc
                progress = True
        out = {}
        for s in SUBCODES:
            if s == "123":
                out[s] = np.asarray(own[s], dtype=np.int64)
                continue
            elems = [value.get((s, e)) for e in range(self.lens[s])]
            if any(v is None for v in elems):
                return None
            out[s] = np.array(elems, dtype=np.int64)
        return out


def apportion(weights, total: int) -> list[int]:
    """Largest-remainder split of ``total`` proportional to ``weights``; ties go to earlier entries."""
    w = np.asarray(weights, dtype=float)
    if total < 0:
        raise ValidationError("total must be nonnegative")
    if w.sum() == 0:
        return [0] * len(w)
    quota = w / w.sum() * total
    base = np.floor(quota + 1e-12).astype(int)
    rest = total - int(base.sum())
    order = sorted(range(len(w)), key=lambda i: (-(quota[i] - base[i]), i))
    for i in order[:rest]:
        base[i] += 1
    return [int(x) for x in base]


def build_schedule(lens: SubcodeLengths, n: int) -> Schedule:
    """Column layout of the uplink; the first layout applies when l12 <= l3, the second otherwise."""
    if not lens.ordered:
        raise ValidationError(f"subcode lengths violate l1+l12+l2 >= max(l2+l23+l3, l1+l13+l3): {lens}")
    L = lens
    if L.branch == 1:
        d = L.l3 - L.l12
        a = L.l1 + L.l12 - L.l3 - L.l23
        b = L.l2 + L.l12 - L.l3 - L.l13
        if min(a, b, d) < 0:
            raise ValidationError(f"negative column length in layout for {lens}")
        spec = [
            (L.l23, [Segment("1", 0, L.l23, 1), Segment("23", 0, L.l23, 2)]),
            (a, [Segment("1", L.l23 + d, a, 1)]),
            (d, [Segment("1", L.l23, d, 1), Segment("3", L.l12, d, 3)]),
            (L.l12, [Segment("12", 0, L.l12, 1), Segment("3", 0, L.l12, 3)]),
            (d, [Segment("2", L.l13, d, 2), Segment("3", L.l12, d, 3)]),
            (b, [Segment("2", L.l13 + d, b, 2)]),
            (L.l13, [Segment("2", 0, L.l13, 2), Segment("13", 0, L.l13, 3)]),
        ]
    else:
        e = L.l12 - L.l3
        s23 = min(L.l23, L.l1)
        s13 = min(L.l13, L.l2)
        if L.l23 - s23 > e or L.l13 - s13 > e:
            raise ValidationError(f"c23 or c13 does not fit the layout for {lens}")
        spec = [
            (L.l1, [Segment("1", 0, L.l1, 1), Segment("23", 0, s23, 2)]),
            (L.l3, [Segment("12", 0, L.l3, 1), Segment("3", 0, L.l3, 3)]),
            (e, [Segment("12", L.l3, e, 1), Segment("23", s23, L.l23 - s23, 2),
                 Segment("13", s13, L.l13 - s13, 3)]),
            (L.l2, [Segment("2", 0, L.l2, 2), Segment("13", 0, s13, 3)]),
        ]
    uses = apportion([length for length, _ in spec], n)
    cols = tuple(Column(length, u, tuple(s for s in segs if s.length > 0))
                 for (length, segs), u in zip(spec, uses))
    return Schedule(L.branch, lens, n, cols)


# --- end-to-end simulation -------------------------------------------------------------


@dataclass(frozen=True)
class ErrorStats:
    trials: int
    errors: int
    relay_errors: int
    downlink_errors: int
    source_errors: int
    case: int
    kappa: float
    m: int
    n: int
    lens: dict = field(default_factory=dict)
    branch: int | None = None
    z: float = 1.96

    @property
    def p_e(self) -> float:
        return self.errors / self.trials

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials, self.z)

    def to_dict(self) -> dict:
        lo, hi = self.interval
        return {
            "case": self.case, "kappa": self.kappa, "m": self.m, "n": self.n,
            "trials": self.trials, "errors": self.errors, "p_e": self.p_e,
            "wilson_low": lo, "wilson_high": hi,
            "stage_errors": {"relay": self.relay_errors, "downlink": self.downlink_errors,
                             "source": self.source_errors},
            "lens": dict(self.lens), "branch": self.branch,
        }


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n <= 0:
        raise ValidationError("need at least one trial")
    ph = k / n
    den = 1 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def _pick_case(p: JointPmf3, ip: InfoProfile, ch: ChannelSpec, case, tol: float) -> int:
    cls = classify(p, tol, ip)
    ok = {1: cls.abcmi, 2: cls.sce and ch.is_symmetric(), 3: cls.common_equals_mutual}
    if case in (None, "auto"):
        for c in (1, 2, 3):
            if ok[c]:
                return c
        raise InvalidClassError(f"source class {cls.label} is not covered by any case")
    case = int(case)
    if case not in ok:
        raise ValidationError(f"case must be 1, 2, 3 or auto, got {case}")
    if not ok[case]:
        raise InvalidClassError(f"case {case} does not apply to a source of class {cls.label}")
    return case


class _Pipeline:
    """Everything fixed for a run: permuted source, lengths, schedule and codes."""

    def __init__(self, p, ch, kappa, case, m, seed, theta, injective, tol, cap):
        self.gf = _field(ch)
        q = self.gf.order
        ip = info_profile(p)
        self.case = _pick_case(p, ip, ch, case, tol)
        self.m = m
        self.n = int(round(kappa * m))
        if self.n < 1:
            raise ValidationError(f"kappa*m = {kappa * m:.3g} gives no channel uses")
        if self.case == 3:
            order = sw_codec.canonical_order(ip)
            self.order = order
            self.p = p.permute(order)
            pip = info_profile(self.p)
            parts = classify(self.p, tol, pip).common_parts
            if injective:
                lens = sw_codec.injective_lengths(self.p, parts, m, q)
            else:
                th = theta if theta is not None else math.log2(q) / m * (1 + 1e-9)
                lens = sw_codec.gk_subcode_lengths(pip, m, q, th, tol)
            self.source = sw_codec.GKSourceCode(self.p, parts, lens, q, m, seed, cap)
        else:
            ells = self._sw_lengths(ip, ch, injective, p.shape, tol)
            order = tuple(sorted((1, 2, 3), key=lambda u: (-ells[u - 1], u)))
            self.order = order
            self.p = p.permute(order)
            e = [ells[u - 1] for u in order]
            lens = SubcodeLengths(e[0], e[1], e[2], 0, 0, 0, 0)
            self.bins = sw_codec.BinCode(m, tuple(q**x for x in e), self.p.shape, seed)
        self.lens = lens
        self.schedule = build_schedule(lens, self.n)
        rng = np.random.default_rng([seed, 0xC0DE])
        self.codes = [LinearCode.random(self.gf.spec, c.length, c.uses, rng) for c in self.schedule.columns]
        self.book = DownlinkCodebook(self.gf.spec, lens.lT, self.n, seed)
        # users were relabelled; noise laws follow them
        self.ch = ChannelSpec(ch.F, (ch.noise[0],) + tuple(ch.noise[u] for u in order), ch.field)

    def _sw_lengths(self, ip, ch, injective, shape, tol):
        q = self.gf.order
        if injective:
            return [math.ceil(self.m * math.log(a) / math.log(q) - 1e-12) if a > 1 else 0 for a in shape]
        kw = kappa_with_margin(ip, ch, 1e-3)
        rates = case1_rates(ip, kw, tol=tol) if self.case == 1 else case2_rates(ip, kw, tol=tol)
        # source bits per symbol of the witness, rounded up to whole field symbols
        return [math.ceil(self.m * r * kw / math.log2(q) - 1e-9) for r in rates]

    def source_encode(self, w, rng):
        q = self.gf.order
        if self.case == 3:
            return self.source.encode(w), None
        subs = {s: np.zeros(0, np.int64) for s in SUBCODES}
        dithers = []
        for u in (1, 2, 3):
            M = self.bins.M[u - 1]
            d = int(rng.integers(0, M))
            dithers.append(d)
            v = sw_codec.dither_index(sw_codec.sw_encode(w[u - 1], u, self.bins), d, M)
            subs[str(u)] = index_digits(v, q, self.lens[str(u)])
        return subs, dithers

    def source_decode(self, user, own_w, subs, dithers):
        j, k = (u for u in (1, 2, 3) if u != user)
        if self.case == 3:
            rec = {s: subs[s] for s in (str(j), str(k), f"{j}{k}")}
            return self.source.decode(user, own_w, rec)
        q = self.gf.order
        idx = []
        for u in (j, k):
            v = block_index(subs[str(u)], q) if len(subs[str(u)]) else 0
            idx.append(sw_codec.undither_index(v, dithers[u - 1], self.bins.M[u - 1]))
        return sw_codec.sw_decode(idx[0], idx[1], own_w, user, self.p, self.bins)

    def trial(self, seed: int, t: int, state: ChannelState):
        gf = self.gf
        rng = np.random.default_rng([seed, t, 0x50, 0])
        w = self.p.sample(rng, self.m)
        subs, dithers = self.source_encode(w, rng)
        sched = self.schedule
        truth = sched.sum_vector(subs, gf)
        decoded = []
        for col, code, msg in zip(sched.columns, self.codes, sched.column_messages(subs, gf)):
            if col.length == 0:
                continue
            xs = [lbc_encode(msg[u], code, u + 1) for u in range(3)]
            y0 = uplink(*xs, state)
            decoded.append(relay_decode_sum(y0, code, self.ch.noise_pmf(0)))
        cT = np.concatenate(decoded) if decoded else np.zeros(0, np.int64)
        relay_bad = not np.array_equal(cT, truth)
        x0 = downlink_encode(cT, self.book)
        down_bad = src_bad = False
        for u in (1, 2, 3):
            own = {s: subs[s] for s in SUBCODES if u in HOLDERS[s]}
            yi = downlink(x0, u, state)
            mask = sched.known_mask(u)
            est = downlink_decode(yi, self.book, self.ch.noise_pmf(u), mask,
                                  sched.known_values(u, own, gf))
            if not np.array_equal(est, cT):
                down_bad = True
            full = sched.recover(u, est, own, gf)
            ok = False
            if full is not None:
                got = self.source_decode(u, w[u - 1], full, dithers)
                if got is not None:
                    j, k = (v for v in (1, 2, 3) if v != u)
                    ok = np.array_equal(got[0], w[j - 1]) and np.array_equal(got[1], w[k - 1])
            if not ok:
                src_bad = True
        error = src_bad
        return error, error and relay_bad, error and down_bad and not relay_bad, \
            error and not relay_bad and not down_bad


def run_end_to_end(p: JointPmf3, ch: ChannelSpec, kappa: float, case="auto", m: int = 6,
                   trials: int = 1000, seed: int = 0, theta: float | None = None,
                   injective: bool = False, tol: float = 1e-9,
                   cap: int = sw_codec.BLOCK_CAP) -> ErrorStats:
    """Monte Carlo estimate of the probability that some user decodes wrongly.

    Codes are drawn once per run from ``seed``; sources, SW dithers and
    channel noise are drawn per trial.  ``injective`` picks subcode lengths
    at which source binning is lossless, isolating the channel codes.
    Stage counts attribute each failed trial to the first stage that went
    wrong: relay sum decoding, downlink decoding, or source decoding.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if m < 1:
        raise ValidationError("m must be >= 1")
    if not kappa > 0:
        raise ValidationError("kappa must be positive")
    pipe = _Pipeline(p, ch, kappa, case, m, seed, theta, injective, tol, cap)
    counts = np.zeros(4, dtype=int)
    for t in range(trials):
        state = ChannelState(pipe.ch, seed, t)
        counts += np.array(pipe.trial(seed, t, state), dtype=int)
    return ErrorStats(trials, int(counts[0]), int(counts[1]), int(counts[2]), int(counts[3]),
                      pipe.case, float(kappa), m, pipe.n, pipe.lens.as_dict(), pipe.schedule.branch)


def phi_for(p: JointPmf3, ch: ChannelSpec) -> float:
    return phi(info_profile(p), ch)
