"""Source classes for which the minimum source-channel rate is known.

Three tests are provided: almost-balanced conditional mutual information
(ABCMI), skewed conditional entropies (SCE), and whether the Gács–Körner
common parts of every user subset carry all of the corresponding mutual
information.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidClassError
from .sources import JointPmf3, InfoProfile, entropy, info_profile

DEFAULT_TOL = 1e-9

SUBSETS = ("12", "13", "23", "123")


def _violations(ip: InfoProfile) -> dict[int, float]:
    """I(WB;WC|WA) - I(WA;WB|WC) - I(WA;WC|WB) for each choice of A."""
    out = {}
    for a in (1, 2, 3):
        b, c = (u for u in (1, 2, 3) if u != a)
        out[a] = ip.mi(b, c) - ip.mi(a, b) - ip.mi(a, c)
    return out


def is_abcmi(ip: InfoProfile, tol: float = DEFAULT_TOL) -> bool:
    return all(v <= tol for v in _violations(ip).values())


def unbalanced_eta(ip: InfoProfile, tol: float = DEFAULT_TOL) -> tuple[int, float]:
    """Return ``(A, eta)`` for an unbalanced profile.

    At most one user can violate the balance condition, so A is unique.
    """
    viol = _violations(ip)
    a = max(viol, key=lambda u: viol[u])
    if viol[a] <= tol:
        raise InvalidClassError("profile has almost-balanced conditional mutual information")
    return a, viol[a]


def is_sce(ip: InfoProfile, tol: float = DEFAULT_TOL) -> bool:
    if is_abcmi(ip, tol):
        return False
    a, eta = unbalanced_eta(ip, tol)
    b, c = (u for u in (1, 2, 3) if u != a)
    return ip.h_pair(b, c) >= max(ip.h_pair(a, b), ip.h_pair(a, c)) + eta - tol


# --- Gács–Körner common parts -----------------------------------------------


@dataclass(frozen=True)
class CommonParts:
    """Common-part labelings V12, V13, V23, V123.

    ``labels[S][u]`` maps every symbol of user ``u`` (for ``u`` in S) to the
    label of V_S it determines; symbols of zero probability map to -1.
    """

    labels: dict[str, dict[int, np.ndarray]]
    entropies: dict[str, float]
    sizes: dict[str, int]
    diagnostics: tuple[str, ...] = ()

    def label_block(self, subset: str, user: int, block: np.ndarray) -> np.ndarray:
        return self.labels[subset][user][block]

    def pmf(self, subset: str, p: JointPmf3) -> np.ndarray:
        u = int(subset[0])
        marg = p.marginal([u])
        lab = self.labels[subset][u]
        ok = lab >= 0
        return np.bincount(lab[ok], weights=marg[ok], minlength=self.sizes[subset])


def _components(p: JointPmf3, users: tuple[int, ...]) -> dict[int, np.ndarray]:
    """Connected components of the support graph joining co-occurring symbols."""
    offsets, n = {}, 0
    for u in users:
        offsets[u] = n
        n += p.shape[u - 1]
    rows, cols = [], []
    for i in users:
        for j in users:
            if i < j:
                wi, wj = np.nonzero(p.marginal([i, j]) > 0)
                rows.append(wi + offsets[i])
                cols.append(wj + offsets[j])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    graph = coo_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
    _, comp = connected_components(graph, directed=False)

    # relabel in order of first appearance so labels are deterministic
    remap: dict[int, int] = {}
    out = {}
    for u in users:
        marg = p.marginal([u])
        lab = np.full(p.shape[u - 1], -1, dtype=np.int64)
        for w in np.flatnonzero(marg > 0):
            cid = comp[offsets[u] + w]
            lab[w] = remap.setdefault(cid, len(remap))
        out[u] = lab
    return out


def gk_common_parts(p: JointPmf3) -> CommonParts:
    labels, ents, sizes = {}, {}, {}
    for s in SUBSETS:
        users = tuple(int(ch) for ch in s)
        labels[s] = _components(p, users)
        sizes[s] = int(max(lab.max() for lab in labels[s].values())) + 1
    parts = CommonParts(labels, ents, sizes)
    for s in SUBSETS:
        ents[s] = entropy(parts.pmf(s, p))

    notes = []
    for s in ("12", "13", "23"):
        u = int(s[0])
        joint = np.zeros((sizes["123"], sizes[s]))
        marg = p.marginal([u])
        ok = marg > 0
        np.add.at(joint, (labels["123"][u][ok], labels[s][u][ok]), marg[ok])
        cond = entropy(joint) - entropy(joint.sum(axis=0))
        if cond > 1e-9:
            notes.append(f"H(V123|V{s}) = {cond:.3g} > 0")
    return CommonParts(labels, ents, sizes, tuple(notes))


# --- classification ------------------------------------------------------------


@dataclass(frozen=True)
class SourceClass:
    abcmi: bool
    sce: bool
    common_equals_mutual: bool
    unbalanced_user: int | None = None
    eta: float | None = None
    common_parts: CommonParts | None = field(default=None, repr=False, compare=False)
    diagnostics: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        names = [n for n, flag in [("abcmi", self.abcmi), ("sce", self.sce),
                                   ("common_equals_mutual", self.common_equals_mutual)] if flag]
        return "+".join(names) if names else "unclassified"

    def to_dict(self) -> dict:
        d = {
            "abcmi": self.abcmi,
            "sce": self.sce,
            "common_equals_mutual": self.common_equals_mutual,
            "A": self.unbalanced_user,
            "eta": self.eta,
        }
        if self.common_parts is not None:
            d["common_parts"] = {f"H(V{s})": self.common_parts.entropies[s] for s in SUBSETS}
        if self.diagnostics:
            d["diagnostics"] = list(self.diagnostics)
        return d


def common_equals_mutual(ip: InfoProfile, parts: CommonParts, tol: float = DEFAULT_TOL) -> bool:
    if ip.mi_triple < -tol:
        return False
    targets = {"12": ip.mi_uncond(1, 2), "13": ip.mi_uncond(1, 3),
               "23": ip.mi_uncond(2, 3), "123": ip.mi_triple}
    return all(abs(parts.entropies[s] - targets[s]) <= tol for s in SUBSETS)


def classify(p: JointPmf3, tol: float = DEFAULT_TOL, ip: InfoProfile | None = None) -> SourceClass:
    ip = ip or info_profile(p)
    parts = gk_common_parts(p)
    abcmi = is_abcmi(ip, tol)
    a = eta = None
    if not abcmi:
        a, eta = unbalanced_eta(ip, tol)
    return SourceClass(
        abcmi=abcmi,
        sce=is_sce(ip, tol),
        common_equals_mutual=common_equals_mutual(ip, parts, tol),
        unbalanced_user=a,
        eta=eta,
        common_parts=parts,
        diagnostics=parts.diagnostics,
    )
