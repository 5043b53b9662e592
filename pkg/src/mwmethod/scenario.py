"""JSON scenarios: group, action, sets, means, system, target power and budgets.

A scenario looks like::

    {
      "name": "cyclic100-interval10",
      "group": {"family": "cyclic", "N": 100},
      "action": {"type": "regular"},
      "lambda": {"interval": 10},
      "A": "lambda",
      "B": {"points": [0]},
      "measure": "counting",
      "group_measure": "counting",
      "system": {"system": "thick", "depth_budget": 3},
      "n": 2,
      "budgets": {"max_translators": 4, "max_candidates": 256, "chain_depth": 20},
      "seed": 0
    }

Group set specs: ``{"interval": r, "center": c}`` (cyclic groups only),
``{"ball": {"generators": [...], "radius": r}}``,
``{"progression": {"generators": [...], "lengths": [...]}}``,
``{"elements": [...]}``, ``{"subgroup": [...generators]}``, ``"full"``, or
the name of an earlier set (``"lambda"``, ``"A"``). Elements are indices,
generator labels (``"r"``, ``"s^-1"``) or coordinate lists. Space sets are
``{"points": [...]}`` or ``{"image_of": set spec, "points": [...]}``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .descent import DescentParams
from .errors import MWError, ParseError, ValidationError
from .groups import (
    ActionTable,
    ESet,
    GroupTable,
    GSet,
    act_set,
    ball,
    build_group,
    coset_action,
    dihedral_vertex_action,
    disjoint_union,
    generated_subgroup,
    interval,
    is_symmetric,
    product_set,
    progression,
    regular_action,
    symmetrize,
)
from .measure import MeanSpace
from .systems import MAX_DEPTH, MWSystem

logger = logging.getLogger(__name__)

DEFAULT_BUDGETS = {"max_translators": 4, "max_candidates": 256, "max_rounds": 64,
                   "chain_depth": 20, "n_jobs": 1}


@dataclass
class Scenario:
    name: str
    group: GroupTable
    action: ActionTable
    lam: GSet
    gamma: GSet
    A: GSet
    C: GSet
    B: ESet
    m: MeanSpace
    mu: MeanSpace
    system: dict
    n: int
    W: GSet | None = None
    budgets: dict = field(default_factory=lambda: dict(DEFAULT_BUDGETS))
    seed: int = 0
    exact_only: bool = False
    raw: dict = field(default_factory=dict)

    def make_system(self) -> MWSystem:
        return MWSystem(self.system["system"], self.lam, self.gamma,
                        measure=self.mu if self.system["system"] == "mu" else None,
                        depth=self.system["depth_budget"])

    def descent_params(self, n: int | None = None) -> DescentParams:
        b = self.budgets
        return DescentParams(self.n if n is None else n, b["max_translators"],
                             b["max_candidates"], b["max_rounds"], b["n_jobs"],
                             self.exact_only)


# -- parsing helpers ---------------------------------------------------------------------

def _require(data: dict, key: str):
    if key not in data:
        raise ValidationError(key, "missing")
    return data[key]


def _int(value, name: str, lo: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(name, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ValidationError(name, f"must be at least {lo}")
    return value


def parse_group(spec) -> GroupTable:
    if not isinstance(spec, dict):
        raise ValidationError("group", "expected an object")
    spec = dict(spec)
    family = _require(spec, "family")
    if family == "cayley_table":
        raw = spec.get("table", spec)
        return build_group("cayley_table", raw=raw)
    if family == "direct_product":
        return build_group(family, factors=[dict(f) for f in _require(spec, "factors")])
    params = {k: v for k, v in spec.items() if k != "family"}
    try:
        return build_group(family, **params)
    except KeyError as exc:
        raise ValidationError("group", f"missing parameter {exc}") from exc


def parse_gset(G: GroupTable, spec, named: dict, field_name: str) -> GSet:
    if isinstance(spec, str):
        if spec == "full":
            return G.full()
        if spec in named:
            return named[spec]
        raise ValidationError(field_name, f"unknown set reference {spec!r}")
    if not isinstance(spec, dict) or len(spec.keys() - {"center"}) != 1:
        raise ValidationError(field_name, "expected exactly one set constructor")
    if "interval" in spec:
        center = G.encode(spec.get("center", 0))
        return interval(G, _int(spec["interval"], field_name, 0), center)
    if "ball" in spec:
        b = spec["ball"]
        gens = [G.encode(g) for g in _require(b, "generators")]
        return ball(G, gens, _int(_require(b, "radius"), field_name, 0))
    if "progression" in spec:
        p = spec["progression"]
        gens = [G.encode(g) for g in _require(p, "generators")]
        return progression(G, gens, [_int(x, field_name, 0) for x in _require(p, "lengths")])
    if "elements" in spec:
        return G.gset(spec["elements"])
    if "subgroup" in spec:
        gens = G.gset(spec["subgroup"])
        return generated_subgroup(gens) if not gens.is_empty() else G.identity_set()
    raise ValidationError(field_name, f"unknown set constructor {sorted(spec)}")


def parse_action(G: GroupTable, spec, named: dict) -> ActionTable:
    if spec is None:
        return regular_action(G)
    if not isinstance(spec, dict):
        raise ValidationError("action", "expected an object")
    kind = _require(spec, "type")
    if kind == "regular":
        return regular_action(G)
    if kind == "dihedral_vertices":
        return dihedral_vertex_action(G)
    if kind == "cosets":
        return coset_action(G, parse_gset(G, _require(spec, "subgroup"), named, "action.subgroup"))
    if kind == "table":
        return ActionTable(G, _require(spec, "act"))
    if kind == "disjoint_union":
        return disjoint_union([parse_action(G, p, named) for p in _require(spec, "parts")])
    raise ValidationError("action", f"unknown action type {kind!r}")


def parse_eset(G: GroupTable, E: ActionTable, spec, named: dict) -> ESet:
    if not isinstance(spec, dict):
        raise ValidationError("B", "expected an object")
    points = spec.get("points", [])
    for p in points:
        _int(p, "B.points", 0)
        if p >= E.space_size:
            raise ValidationError("B.points", f"{p} out of range 0..{E.space_size - 1}")
    B = E.eset(points)
    if "image_of" in spec:
        B = act_set(parse_gset(G, spec["image_of"], named, "B.image_of"), B)
    return B


def parse_measure(carrier, spec, field_name: str) -> MeanSpace:
    if spec is None or spec == "counting":
        return MeanSpace(carrier)
    if isinstance(spec, dict) and "measure" in spec:
        spec = spec["measure"]
        if spec == "counting":
            return MeanSpace(carrier)
    if not isinstance(spec, dict) or "weights" not in spec:
        raise ValidationError(field_name, "expected 'counting' or {\"weights\": [...]}")
    lattice = spec.get("lattice")
    if lattice is not None:
        lattice = [sum(1 << int(x) for x in members) for members in lattice]
    try:
        return MeanSpace(carrier, spec["weights"], lattice)
    except ValidationError as exc:
        raise ValidationError(field_name, str(exc)) from exc


def _symmetric_with_identity(X: GSet, field_name: str) -> GSet:
    if is_symmetric(X) and X.members & 1:
        return X
    logger.warning("%s is not symmetric with identity; symmetrizing", field_name)
    return symmetrize(X)


def parse_scenario(data: dict, *, name: str | None = None) -> Scenario:
    """Build and validate a :class:`Scenario` from decoded JSON."""
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    G = parse_group(_require(data, "group"))
    named: dict[str, GSet] = {}
    lam = _symmetric_with_identity(parse_gset(G, _require(data, "lambda"), named, "lambda"), "lambda")
    named["lambda"] = lam
    if data.get("gamma") is None:
        gamma = generated_subgroup(lam)
    else:
        gamma = _symmetric_with_identity(parse_gset(G, data["gamma"], named, "gamma"), "gamma")
    named["gamma"] = gamma
    A = parse_gset(G, data.get("A", "lambda"), named, "A")
    if A.is_empty():
        raise ValidationError("A", "must be nonempty")
    named["A"] = A
    C = parse_gset(G, data["C"], named, "C") if "C" in data else product_set(lam, A)
    named["C"] = C
    W = parse_gset(G, data["W"], named, "W") if "W" in data else None
    E = parse_action(G, data.get("action"), named)
    B = parse_eset(G, E, data.get("B", {"points": [0]}), named)
    m = parse_measure(E, data.get("measure"), "measure")
    mu = parse_measure(G, data.get("group_measure"), "group_measure")
    system = data.get("system", {"system": "thick", "depth_budget": 3})
    if not isinstance(system, dict) or system.get("system") not in ("mu", "thick", "generic"):
        raise ValidationError("system", "expected {\"system\": mu|thick|generic, \"depth_budget\": int}")
    depth = _int(system.get("depth_budget", 3), "system.depth_budget", 1)
    if depth > MAX_DEPTH:
        raise ValidationError("system.depth_budget", f"at most {MAX_DEPTH}")
    budgets = dict(DEFAULT_BUDGETS)
    for key, value in data.get("budgets", {}).items():
        if key not in budgets:
            raise ValidationError(f"budgets.{key}", "unknown budget")
        budgets[key] = _int(value, f"budgets.{key}", 0 if key == "chain_depth" else 1)
    return Scenario(
        name=data.get("name", name or "scenario"), group=G, action=E, lam=lam, gamma=gamma,
        A=A, C=C, B=B, m=m, mu=mu, system={"system": system["system"], "depth_budget": depth},
        n=_int(_require(data, "n"), "n", 1), W=W, budgets=budgets,
        seed=_int(data.get("seed", 0), "seed"), raw=data)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_scenario(data, name=path.stem)


def bundled_scenarios() -> list[Path]:
    """Paths of the scenarios shipped with the package, sorted by name."""
    root = resources.files("mwmethod") / "scenarios"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> Scenario:
    for p in bundled_scenarios():
        if p.stem == name:
            return load_scenario(p)
    raise MWError(f"no bundled scenario named {name!r}")
