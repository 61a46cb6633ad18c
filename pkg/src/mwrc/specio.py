"""Loading problem specifications (source + channel + options) from JSON.

Source forms accepted under ``"source"``:

* ``{"components": [...], "users": ...}``: independent components, each
  ``{"name", "pmf": [...]}``, ``{"name", "uniform_bits": b}`` or
  ``{"name", "uniform": n}``; users as a list of three rules or a dict keyed
  ``W1``/``W2``/``W3``, each ``{"components": [...], "combine": "tuple" |
  "xor-mod-q", "q": int}``.
* ``{"alphabet": [a1, a2, a3], "entries": [{"w1", "w2", "w3", "p"}, ...]}``.
* ``{"table": nested lists}`` indexed ``[w1][w2][w3]``.

Channel: ``{"F": int | {"p", "k", "poly"}, "noise": {"N0": [...], ..., "N3":
[...]}}``.  Noise lists shorter than F are zero padded.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .gf import FieldSpec
from .rates import ChannelSpec
from .sources import Component, JointPmf3, NoisePmf, UserRule, pmf_from_components

OPTION_KEYS = {"tol", "delta", "theta", "seed", "cap", "m", "kappa", "trials", "case"}


@dataclass(frozen=True)
class ProblemSpec:
    source: JointPmf3
    channel: ChannelSpec
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def digest(self) -> str:
        return digest(self.raw)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def _need(d, key: str, where: str):
    if not isinstance(d, dict):
        raise ValidationError(f"{where}: expected an object")
    if key not in d:
        raise ValidationError(f"{where}: missing key {key!r}")
    return d[key]


def _component(obj, where: str) -> Component:
    name = _need(obj, "name", where)
    if "pmf" in obj:
        return Component(str(name), tuple(obj["pmf"]))
    if "uniform_bits" in obj:
        return Component.uniform_bits(str(name), int(obj["uniform_bits"]))
    if "uniform" in obj:
        n = int(obj["uniform"])
        if n < 1:
            raise ValidationError(f"{where}: uniform size must be >= 1")
        return Component(str(name), (1.0 / n,) * n)
    raise ValidationError(f"{where}: component needs 'pmf', 'uniform_bits' or 'uniform'")


def _user_rule(obj, where: str) -> UserRule:
    comps = _need(obj, "components", where)
    if not isinstance(comps, list):
        raise ValidationError(f"{where}.components: expected a list of names")
    return UserRule(tuple(str(c) for c in comps), obj.get("combine", "tuple"), obj.get("q"))


def parse_source(obj, cap: int | None = None) -> JointPmf3:
    where = "source"
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    if "components" in obj:
        comps = [_component(c, f"{where}.components[{i}]") for i, c in enumerate(obj["components"])]
        users = _need(obj, "users", where)
        if isinstance(users, dict):
            try:
                users = [users[k] for k in ("W1", "W2", "W3")]
            except KeyError as exc:
                raise ValidationError(f"{where}.users: missing {exc.args[0]}") from None
        if not isinstance(users, list) or len(users) != 3:
            raise ValidationError(f"{where}.users: need exactly three user rules")
        rules = [_user_rule(u, f"{where}.users[{i}]") for i, u in enumerate(users)]
        kwargs = {} if cap is None else {"cap": cap}
        return pmf_from_components(comps, rules, **kwargs)
    if "entries" in obj:
        shape = _need(obj, "alphabet", where)
        entries = []
        for i, e in enumerate(obj["entries"]):
            at = f"{where}.entries[{i}]"
            entries.append(tuple(int(_need(e, k, at)) for k in ("w1", "w2", "w3")) + (float(_need(e, "p", at)),))
        return JointPmf3.from_entries(shape, entries)
    if "table" in obj:
        try:
            table = np.asarray(obj["table"], dtype=float)
        except ValueError:
            raise ValidationError(f"{where}.table: ragged or non-numeric table") from None
        return JointPmf3(table)
    raise ValidationError(f"{where}: expected 'components', 'entries' or 'table'")


def parse_channel(obj) -> ChannelSpec:
    where = "channel"
    f = _need(obj, "F", where)
    spec = None
    if isinstance(f, dict):
        spec = FieldSpec(int(_need(f, "p", f"{where}.F")), int(f.get("k", 1)),
                         tuple(f["poly"]) if f.get("poly") is not None else None)
        F = spec.order
    else:
        F = int(f)
    noise = _need(obj, "noise", where)
    laws = []
    for d in range(4):
        key = f"N{d}"
        probs = _need(noise, key, f"{where}.noise")
        if not isinstance(probs, list) or len(probs) > F:
            raise ValidationError(f"{where}.noise.{key}: expected a list of at most F={F} probabilities")
        laws.append(NoisePmf(tuple(float(x) for x in probs)))
    return ChannelSpec(F, tuple(laws), spec)


def parse_spec(obj: dict) -> ProblemSpec:
    if not isinstance(obj, dict):
        raise ValidationError("spec: expected a JSON object")
    options = dict(obj.get("options", {}))
    unknown = set(options) - OPTION_KEYS
    if unknown:
        raise ValidationError(f"options: unknown keys {sorted(unknown)}")
    source = parse_source(_need(obj, "source", "spec"), options.get("cap"))
    channel = parse_channel(_need(obj, "channel", "spec"))
    raw = {"source": obj["source"], "channel": obj["channel"], "options": options}
    return ProblemSpec(source, channel, options, json.loads(canonical_json(raw)))


def bundled_specs() -> list[str]:
    return sorted(p.name for p in resources.files("mwrc.specs").iterdir() if p.name.endswith(".json"))


def read_text(path: str) -> str:
    """Contents of a spec file; names of bundled specs resolve to package data."""
    p = Path(path)
    if p.exists():
        return p.read_text()
    name = p.name
    bundled = resources.files("mwrc.specs") / name
    if bundled.is_file():
        return bundled.read_text()
    raise ValidationError(f"spec file {path!r} not found (bundled: {', '.join(bundled_specs())})")


def load_spec(path: str) -> ProblemSpec:
    text = read_text(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return parse_spec(obj)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None
