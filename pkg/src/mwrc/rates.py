"""Source-channel rate bounds for the three-user finite-field MWRC.

Rates are in bits per channel use and source-channel rates (kappa) in
channel uses per source triple.  Everything here depends on the channel only
through ``log F`` and the noise entropies, so a bare cardinality F works
(including group alphabets such as integers modulo 2^10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import classify as cls_
from .errors import DomainError, InvalidClassError, ValidationError
from .gf import FieldSpec, get_field, is_prime
from .sources import InfoProfile, JointPmf3, NoisePmf, info_profile

USERS = (1, 2, 3)
SYMMETRY_TOL = 1e-9
DEFAULT_DELTA = 1e-3
BISECTION_TOL = 1e-6
STRICT_EPS = 1e-6


def _others(i: int) -> tuple[int, int]:
    j, k = (u for u in USERS if u != i)
    return j, k


class ModGroup:
    """Integers modulo F under addition; the alphabet of a non-field channel."""

    def __init__(self, order: int):
        self.order = order
        self.dtype = np.int64

    def add(self, a, b):
        return (np.asarray(a, dtype=np.int64) + b) % self.order

    def sub(self, a, b):
        return (np.asarray(a, dtype=np.int64) - b) % self.order

    def neg(self, a):
        return (-np.asarray(a, dtype=np.int64)) % self.order


@dataclass(frozen=True)
class ChannelSpec:
    """Alphabet size F and the noise laws of the uplink (N0) and downlinks (N1..N3).

    ``field`` is set when the alphabet is a genuine finite field; it is
    required by the codecs but not by the rate formulas.  A prime F implies
    GF(F); any other integer F means addition modulo F.
    """

    F: int
    noise: tuple[NoisePmf, NoisePmf, NoisePmf, NoisePmf]
    field: FieldSpec | None = None

    def __post_init__(self):
        if self.F < 2:
            raise ValidationError("channel alphabet must have at least two symbols")
        if len(self.noise) != 4:
            raise ValidationError("need four noise distributions N0..N3")
        noise = tuple(n if isinstance(n, NoisePmf) else NoisePmf(tuple(n)) for n in self.noise)
        for d, n in enumerate(noise):
            n.padded(self.F)
            if n.entropy >= self.log_f - 1e-12:
                raise ValidationError(f"H(N{d}) = {n.entropy:.6g} is not below log F = {self.log_f:.6g}")
        object.__setattr__(self, "noise", noise)
        fs = self.field
        if fs is None and is_prime(self.F):
            fs = FieldSpec(self.F)
        if fs is not None and fs.order != self.F:
            raise ValidationError(f"field {fs} does not have {self.F} elements")
        object.__setattr__(self, "field", fs)

    @property
    def log_f(self) -> float:
        return math.log2(self.F)

    @property
    def h_noise(self) -> tuple[float, float, float, float]:
        return tuple(n.entropy for n in self.noise)

    def denom(self, i: int) -> float:
        """log F - max{H(N0), H(Ni)}: the capacity bounding what user i receives."""
        h = self.h_noise
        return self.log_f - max(h[0], h[i])

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        h = self.h_noise
        return max(h[1:]) - min(h[1:]) <= tol

    def group(self):
        return get_field(self.field) if self.field is not None else ModGroup(self.F)

    def noise_pmf(self, d: int) -> np.ndarray:
        return self.noise[d].padded(self.F)

    @classmethod
    def simple(cls, F: int, n0: Sequence[float], ni: Sequence[float], field: FieldSpec | None = None):
        """Channel whose three downlinks share one noise law."""
        return cls(F, (NoisePmf(tuple(n0)), NoisePmf(tuple(ni)), NoisePmf(tuple(ni)), NoisePmf(tuple(ni))), field)


@dataclass(frozen=True)
class RatePoint:
    R1: float
    R2: float
    R3: float

    def __post_init__(self):
        if min(self) <= 0:
            raise ValidationError(f"rates must be strictly positive, got {tuple(self)}")

    def __iter__(self):
        return iter((self.R1, self.R2, self.R3))

    def __getitem__(self, user: int) -> float:
        return (self.R1, self.R2, self.R3)[user - 1]


# --- bounds ---------------------------------------------------------------------


def phi(ip: InfoProfile, ch: ChannelSpec) -> float:
    """Cut-set value: max over i of H(Wj,Wk|Wi) / (log F - max{H(N0), H(Ni)})."""
    return max(ip.h_pair(*_others(i)) / ch.denom(i) for i in USERS)


def cutset_bound(ip: InfoProfile, ch: ChannelSpec) -> float:
    """Lower bound on every achievable source-channel rate (same value as :func:`phi`)."""
    return phi(ip, ch)


def kappa_with_margin(ip: InfoProfile, ch: ChannelSpec, delta: float) -> float:
    """max over i of (H(Wj,Wk|Wi) + delta) / (log F - max{H(N0), H(Ni)})."""
    return max((ip.h_pair(*_others(i)) + delta) / ch.denom(i) for i in USERS)


def cover_tuncel_bound(ip: InfoProfile, ch: ChannelSpec) -> float:
    """Rate needed when the relay decodes all three messages and broadcasts them.

    Uplink: H(W1,W2,W3) / (log F - H(N0)); downlink to user i with side
    information W_i: H(Wj,Wk|Wi) / (log F - H(Ni)).
    """
    h = ch.h_noise
    up = ip.h_joint / (ch.log_f - h[0])
    down = max(ip.h_pair(*_others(i)) / (ch.log_f - h[i]) for i in USERS)
    return max(up, down)


# --- SW/FDF-IS feasibility by Fourier–Motzkin ----------------------------------------


@dataclass(frozen=True)
class _Row:
    """coef . R  (<|<=)  h / kappa + c, with the originating constraints."""

    coef: tuple[float, float, float]
    h: float
    c: float
    origin: tuple[tuple[str, float], ...]

    def scaled(self, s: float) -> "_Row":
        return _Row(tuple(x * s for x in self.coef), self.h * s, self.c * s,
                    tuple((name, w * s) for name, w in self.origin))

    def __add__(self, other: "_Row") -> "_Row":
        orig: dict[str, float] = dict(self.origin)
        for name, w in other.origin:
            orig[name] = orig.get(name, 0.0) + w
        return _Row(tuple(a + b for a, b in zip(self.coef, other.coef)), self.h + other.h,
                    self.c + other.c, tuple(sorted(orig.items())))

    def rhs(self, kappa: float) -> float:
        return self.h / kappa + self.c


def swfdf_constraints(ip: InfoProfile, ch: ChannelSpec) -> list[_Row]:
    """The nine constraints of the SW/FDF-IS achievable set, all of the form coef.R < rhs."""
    rows = []
    for i in USERS:
        e = [0.0, 0.0, 0.0]
        e[i - 1] = -1.0
        rows.append(_Row(tuple(e), -ip.h_given_others(i), 0.0, ((f"R{i} > H(W{i}|W{_others(i)[0]},W{_others(i)[1]})/k", 1.0),)))
    for i in USERS:
        j, k = _others(i)
        e = [0.0, 0.0, 0.0]
        e[j - 1] = e[k - 1] = -1.0
        rows.append(_Row(tuple(e), -ip.h_pair(j, k), 0.0, ((f"R{j}+R{k} > H(W{j},W{k}|W{i})/k", 1.0),)))
        e = [0.0, 0.0, 0.0]
        e[j - 1] = e[k - 1] = 1.0
        rows.append(_Row(tuple(e), 0.0, ch.denom(i), ((f"R{j}+R{k} < logF-max(H(N0),H(N{i}))", 1.0),)))
    return rows


def _eliminate(rows: list[_Row], var: int) -> list[_Row]:
    pos = [r for r in rows if r.coef[var] > 1e-15]
    neg = [r for r in rows if r.coef[var] < -1e-15]
    out = [r for r in rows if abs(r.coef[var]) <= 1e-15]
    for p in pos:
        for n in neg:
            comb = p.scaled(1 / p.coef[var]) + n.scaled(-1 / n.coef[var])
            coef = list(comb.coef)
            coef[var] = 0.0
            out.append(_Row(tuple(coef), comb.h, comb.c, comb.origin))
    return out


def _fm_stages(ip: InfoProfile, ch: ChannelSpec) -> list[list[_Row]]:
    """Constraint systems after eliminating R1, then R2, then R3."""
    stages = [swfdf_constraints(ip, ch)]
    for var in range(3):
        stages.append(_eliminate(stages[-1], var))
    return stages


@dataclass(frozen=True)
class Feasibility:
    """Outcome of a feasibility check.

    ``conflicts`` holds every smallest contradictory subset of the original
    constraints; ``bounds`` gives the right-hand side of each original
    constraint at the tested kappa.
    """

    feasible: bool
    witness: RatePoint | None = None
    conflicts: tuple[tuple[str, ...], ...] = ()
    bounds: dict = field(default_factory=dict, compare=False)
    slack: float = math.inf

    @property
    def conflict(self) -> tuple[str, ...]:
        return self.conflicts[0] if self.conflicts else ()

    def describe_conflicts(self) -> list[str]:
        out = []
        for group in self.conflicts:
            out.append(" and ".join(f"{name.split(' ')[0]} {name.split(' ')[1]} {self.bounds[name]:.4f}"
                                    for name in group))
        return out

    def __iter__(self):
        return iter((self.feasible, self.witness))

    def __bool__(self):
        return self.feasible


def _pick(lo: float, hi: float, strict: bool) -> float:
    if strict and not lo < hi:
        raise ValueError
    if math.isinf(hi):
        return lo + 1.0
    return 0.5 * (lo + hi)


def _back_substitute(stages: list[list[_Row]], kappa: float, strict: bool) -> tuple[float, float, float]:
    vals = [0.0, 0.0, 0.0]
    for var in (2, 1, 0):
        rows = stages[var]
        lo, hi = -math.inf, math.inf
        for r in rows:
            a = r.coef[var]
            if abs(a) <= 1e-15:
                continue
            rest = r.rhs(kappa) - sum(r.coef[v] * vals[v] for v in range(3) if v != var)
            if a > 0:
                hi = min(hi, rest / a)
            else:
                lo = max(lo, rest / a)
        vals[var] = _pick(lo, hi, strict)
    return tuple(vals)


def swfdf_feasible(kappa: float, ip: InfoProfile, ch: ChannelSpec, tol: float = 0.0,
                   closed: bool = False) -> Feasibility:
    """Is ``kappa`` in the SW/FDF-IS achievable set?

    Decides whether positive R1, R2, R3 exist with kappa R_i > H(Wi|Wj,Wk),
    kappa (R_i + R_j) > H(Wi,Wj|Wk) and R_j + R_k < log F - max{H(N0), H(Ni)}.
    With ``closed=True`` the inequalities are relaxed to their closure, which
    is what the infimum search uses.  On infeasibility ``conflict`` lists the
    smallest set of original constraints whose combination is contradictory.
    """
    if kappa <= 0:
        raise DomainError(f"source-channel rate must be positive, got {kappa}")
    stages = _fm_stages(ip, ch)
    bounds = {r.origin[0][0]: abs(r.rhs(kappa)) for r in stages[0]}
    slacks = [(r.rhs(kappa), r) for r in stages[-1]]
    worst = min((s for s, _ in slacks), default=math.inf)
    ok = worst >= -tol if closed else worst > tol
    if not ok:
        bad = [r for s, r in slacks if (s < -tol if closed else s <= tol)]
        size = min(len(r.origin) for r in bad)
        groups = sorted({tuple(sorted(name for name, _ in r.origin)) for r in bad if len(r.origin) == size})
        return Feasibility(False, None, tuple(groups), bounds, worst)
    try:
        vals = _back_substitute(stages, kappa, strict=not closed)
        witness = RatePoint(*vals) if min(vals) > 0 else None
    except (ValueError, ValidationError):
        witness = None
    return Feasibility(True, witness, (), bounds, worst)


def swfdf_inf_kappa_exact(ip: InfoProfile, ch: ChannelSpec) -> float:
    """Closed-form infimum of the SW/FDF-IS set from the eliminated system.

    Every fully eliminated row reads 0 < h/kappa + c with c > 0, hence
    kappa > -h/c; the infimum is the largest such threshold.
    """
    best = 0.0
    for r in _fm_stages(ip, ch)[-1]:
        if r.c > 0:
            best = max(best, -r.h / r.c)
        elif r.h < 0:
            return math.inf
    return best


def swfdf_inf_kappa(ip: InfoProfile, ch: ChannelSpec, tol: float = BISECTION_TOL) -> float:
    """Infimum of the SW/FDF-IS achievable set by bisection on closed feasibility."""
    lo = phi(ip, ch)
    if lo <= 0:
        return 0.0
    if swfdf_feasible(lo, ip, ch, tol=1e-12, closed=True):
        return lo
    hi = 2 * lo
    while not swfdf_feasible(hi, ip, ch, tol=1e-12, closed=True):
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if swfdf_feasible(mid, ip, ch, tol=1e-12, closed=True):
            hi = mid
        else:
            lo = mid
    return hi


# --- proposition witnesses -----------------------------------------------------------


def case1_rates(ip: InfoProfile, kappa: float, delta: float = DEFAULT_DELTA,
                tol: float = cls_.DEFAULT_TOL) -> RatePoint:
    """Rate choice for ABCMI sources.

    kappa R_i = H(Wi|Wj,Wk) + [I(Wi;Wk|Wj) + I(Wi;Wj|Wk) - I(Wj;Wk|Wi)]/2 + delta/4
    """
    if kappa <= 0 or delta <= 0:
        raise DomainError("kappa and delta must be positive")
    if not cls_.is_abcmi(ip, tol):
        raise InvalidClassError("case-1 rates need almost-balanced conditional mutual information")
    r = []
    for i in USERS:
        j, k = _others(i)
        bracket = max(ip.mi(i, k) + ip.mi(i, j) - ip.mi(j, k), 0.0)
        r.append((ip.h_given_others(i) + bracket / 2 + delta / 4) / kappa)
    return RatePoint(*r)


def case2_rates(ip: InfoProfile, kappa: float, delta: float = DEFAULT_DELTA,
                tol: float = cls_.DEFAULT_TOL) -> RatePoint:
    """Rate choice for unbalanced sources, returned in the original user order.

    With A the unbalanced user and (B, C) the other two:
    kappa R_A = H(WA|WB,WC) + delta/4, and R_B, R_C split the remaining
    conditional mutual information as in the ABCMI rule.
    """
    if kappa <= 0 or delta <= 0:
        raise DomainError("kappa and delta must be positive")
    a, _ = cls_.unbalanced_eta(ip, tol)
    b, c = _others(a)
    r = {a: (ip.h_given_others(a) + delta / 4) / kappa}
    r[b] = (ip.h_given_others(b) + (ip.mi(b, c) + ip.mi(a, b) - ip.mi(a, c)) / 2 + delta / 4) / kappa
    r[c] = (ip.h_given_others(c) + (ip.mi(b, c) + ip.mi(a, c) - ip.mi(a, b)) / 2 + delta / 4) / kappa
    return RatePoint(r[1], r[2], r[3])


# --- theorem dispatcher --------------------------------------------------------------


@dataclass(frozen=True)
class RateReport:
    phi: float
    inf_kappa_swfdf: float
    source_class: cls_.SourceClass
    kappa_star: float | None
    case: int | None
    witness: RatePoint | None
    witness_kappa: float | None
    cover_tuncel: float
    delta: float
    symmetric_channel: bool
    upper_bound: float
    profile: InfoProfile = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "inf_kappa_swfdf": self.inf_kappa_swfdf,
            "kappa_star": self.kappa_star,
            "case": self.case,
            "interval": [self.phi, self.upper_bound],
            "class": self.source_class.to_dict(),
            "symmetric_channel": self.symmetric_channel,
            "witness": None if self.witness is None else {
                "kappa": self.witness_kappa, "R1": self.witness.R1, "R2": self.witness.R2, "R3": self.witness.R3},
            "cover_tuncel": self.cover_tuncel,
            "delta": self.delta,
            "profile": self.profile.as_dict(),
        }


def theorem_min_rate(p: JointPmf3, ch: ChannelSpec, delta: float = DEFAULT_DELTA,
                     tol: float = cls_.DEFAULT_TOL) -> RateReport:
    """Bounds on the minimum source-channel rate, exact when a solved class applies."""
    ip = info_profile(p)
    sc = cls_.classify(p, tol, ip=ip)
    lower = phi(ip, ch)
    inf_k = swfdf_inf_kappa(ip, ch)
    symmetric = ch.is_symmetric()
    case = None
    if sc.abcmi:
        case = 1
    elif sc.sce and symmetric:
        case = 2
    elif sc.common_equals_mutual:
        case = 3

    witness = wk = None
    if case in (1, 2) and lower > 0:
        wk = kappa_with_margin(ip, ch, delta)
        witness = case1_rates(ip, wk, delta, tol) if case == 1 else case2_rates(ip, wk, delta, tol)
    elif inf_k > 0:
        wk = inf_k + STRICT_EPS
        res = swfdf_feasible(wk, ip, ch)
        witness = res.witness if res else None
        wk = wk if witness is not None else None

    return RateReport(
        phi=lower,
        inf_kappa_swfdf=inf_k,
        source_class=sc,
        kappa_star=lower if case is not None else None,
        case=case,
        witness=witness,
        witness_kappa=wk,
        cover_tuncel=cover_tuncel_bound(ip, ch),
        delta=delta,
        symmetric_channel=symmetric,
        upper_bound=lower if case is not None else inf_k,
        profile=ip,
    )
