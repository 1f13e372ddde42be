"""JSON system descriptions with exact rational round-tripping.

A config carries the number field (minimal polynomial plus isolating
box), the generator maps as field-element literals, the probability
vector and the computation budgets.  All rationals are written as
"num/den" strings; loading then re-serializing a canonical file
reproduces it byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dfield
from fractions import Fraction
from importlib import resources

from .field import NumberField, RootBox, FieldError, format_rational
from .intervals import RatInterval
from .maps import IFS, ScaleBase, Similitude, MapError


class ConfigError(ValueError):
    pass


DEFAULT_BUDGETS = {
    "max_neighbor_nodes": 20000,
    "max_states": 20000,
    "tuple_budget": 200000,
    "pressure_n": 14,
    "kron_dim_budget": 200000,
    "null_eps": 1e-12,
    "iteration_tol": 1e-10,
    "max_iterations": 10000,
    "subdivision_depth": 12,
}


def _rat(s, where: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"{where}: bad rational {s!r}: {exc}") from exc


def _element_literal(entry, where: str):
    if not isinstance(entry, list) or not entry:
        raise ConfigError(f"{where}: field element literal must be a non-empty list")
    return [_rat(x, where) for x in entry]


@dataclass
class IfsConfig:
    name: str
    backend: str                   # "real" | "complex"
    dimension: int
    mode: str                      # "equicontractive" | "commensurable"
    min_poly: list
    root_box: dict                 # {"real": (lo,hi), "imag": (lo,hi)?} as Fractions
    base_ratio: list               # element coeffs; complex: |r|^2 coeffs
    maps: list                     # [{"linear": ..., "translation": ..., "scale_exponent": k}]
    probabilities: list
    budgets: dict = dfield(default_factory=dict)

    # -- parsing -------------------------------------------------------------
    @staticmethod
    def from_dict(data: dict) -> "IfsConfig":
        for key in ("name", "backend", "dimension", "mode", "field",
                    "base_ratio", "maps", "probabilities"):
            if key not in data:
                raise ConfigError(f"missing config key {key!r}")
        backend = data["backend"]
        if backend not in ("real", "complex"):
            raise ConfigError(f"backend must be 'real' or 'complex', got {backend!r}")
        mode = data["mode"]
        if mode not in ("equicontractive", "commensurable"):
            raise ConfigError(f"mode must be 'equicontractive' or 'commensurable', got {mode!r}")
        dim = data["dimension"]
        if not isinstance(dim, int) or dim < 1:
            raise ConfigError("dimension must be a positive integer")
        if backend == "complex" and dim != 1:
            raise ConfigError("complex backend fixes dimension 1 (maps act on C)")
        fdesc = data["field"]
        if "minimal_polynomial" not in fdesc or "root_box" not in fdesc:
            raise ConfigError("field needs 'minimal_polynomial' and 'root_box'")
        minpoly = [_rat(c, "minimal_polynomial") for c in fdesc["minimal_polynomial"]]
        boxd = fdesc["root_box"]
        if "real" not in boxd:
            raise ConfigError("root_box needs a 'real' interval")
        box = {"real": tuple(_rat(x, "root_box.real") for x in boxd["real"])}
        if "imag" in boxd:
            box["imag"] = tuple(_rat(x, "root_box.imag") for x in boxd["imag"])
        if backend == "complex" and "imag" not in box:
            raise ConfigError("complex backend needs an 'imag' part in root_box")
        base = _element_literal(data["base_ratio"], "base_ratio")
        maps = []
        for i, mp in enumerate(data["maps"]):
            where = f"maps[{i}]"
            if "linear" not in mp or "translation" not in mp or "scale_exponent" not in mp:
                raise ConfigError(f"{where}: needs linear, translation, scale_exponent")
            k = mp["scale_exponent"]
            if not isinstance(k, int) or k < 1:
                raise ConfigError(f"{where}: scale_exponent must be a positive integer")
            if backend == "complex":
                lin = _element_literal(mp["linear"], where + ".linear")
                tr = _element_literal(mp["translation"], where + ".translation")
            else:
                lin = [[_element_literal(e, where + ".linear") for e in row]
                       for row in mp["linear"]]
                if len(lin) != dim or any(len(row) != dim for row in lin):
                    raise ConfigError(f"{where}: linear part must be {dim}x{dim}")
                tr = [_element_literal(e, where + ".translation")
                      for e in mp["translation"]]
                if len(tr) != dim:
                    raise ConfigError(f"{where}: translation must have {dim} entries")
            maps.append({"linear": lin, "translation": tr, "scale_exponent": k})
        probs = [_rat(p, "probabilities") for p in data["probabilities"]]
        budgets = dict(DEFAULT_BUDGETS)
        for k, v in data.get("budgets", {}).items():
            if k not in DEFAULT_BUDGETS:
                raise ConfigError(f"unknown budget key {k!r}")
            budgets[k] = v
        return IfsConfig(data["name"], backend, dim, mode, minpoly, box, base,
                         maps, probs, budgets)

    @staticmethod
    def load(path) -> "IfsConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return IfsConfig.from_dict(data)

    # -- construction -----------------------------------------------------------
    def build_field(self) -> NumberField:
        re_lo, re_hi = self.root_box["real"]
        imag = self.root_box.get("imag")
        box = RootBox(RatInterval(re_lo, re_hi),
                      RatInterval(*imag) if imag else None)
        try:
            return NumberField(self.min_poly, box,
                               complex_embedding=(self.backend == "complex"))
        except FieldError as exc:
            raise ConfigError(f"field: {exc}") from exc

    def build_ifs(self, field: NumberField | None = None) -> IFS:
        if field is None:
            field = self.build_field()
        try:
            if self.backend == "complex":
                base = ScaleBase(field, ratio_sq=field.element(self.base_ratio))
                maps = [Similitude(field, field.element(m["linear"]),
                                   field.element(m["translation"]),
                                   m["scale_exponent"]) for m in self.maps]
            else:
                base = ScaleBase(field, ratio=field.element(self.base_ratio))
                maps = []
                for m in self.maps:
                    lin = tuple(tuple(field.element(e) for e in row)
                                for row in m["linear"])
                    tr = tuple(field.element(e) for e in m["translation"])
                    maps.append(Similitude(field, lin, tr, m["scale_exponent"]))
            return IFS(field, maps, self.probabilities, base, mode=self.mode)
        except (FieldError, MapError) as exc:
            raise ConfigError(f"maps: {exc}") from exc

    # -- canonical serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        def elem(e):
            return [format_rational(c) for c in e]

        out = {
            "name": self.name,
            "backend": self.backend,
            "dimension": self.dimension,
            "mode": self.mode,
            "field": {
                "minimal_polynomial": [format_rational(c) for c in self.min_poly],
                "root_box": {"real": [format_rational(x) for x in self.root_box["real"]]},
            },
            "base_ratio": elem(self.base_ratio),
            "maps": [],
            "probabilities": [format_rational(p) for p in self.probabilities],
            "budgets": {k: self.budgets[k] for k in sorted(self.budgets)},
        }
        if "imag" in self.root_box:
            out["field"]["root_box"]["imag"] = [format_rational(x)
                                                for x in self.root_box["imag"]]
        for m in self.maps:
            if self.backend == "complex":
                out["maps"].append({"linear": elem(m["linear"]),
                                    "translation": elem(m["translation"]),
                                    "scale_exponent": m["scale_exponent"]})
            else:
                out["maps"].append({
                    "linear": [[elem(e) for e in row] for row in m["linear"]],
                    "translation": [elem(e) for e in m["translation"]],
                    "scale_exponent": m["scale_exponent"],
                })
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def bundled_names() -> list:
    files = resources.files("selfsim.configs")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> IfsConfig:
    ref = resources.files("selfsim.configs").joinpath(f"{name}.json")
    if not ref.is_file():
        raise ConfigError(f"no bundled config named {name!r}; "
                          f"available: {', '.join(bundled_names())}")
    with ref.open("r", encoding="utf-8") as fh:
        return IfsConfig.from_dict(json.load(fh))
