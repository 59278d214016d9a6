"""Loading of field / extension configuration files (INI format)."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .ideals import FractionalIdeal, install_norm_classifier
from .numfield import Extension, FieldError, field_from_spec, parse_vectors


class ConfigError(ValueError):
    pass


@dataclass
class ExtensionConfig:
    name: str
    ext: Extension
    w: list
    A: FractionalIdeal
    source: str

    @property
    def E(self):
        return self.ext.E

    @property
    def F(self):
        return self.ext.F


def bundled_configs() -> list:
    return sorted(p.name for p in resources.files("heckelab").joinpath("configs").iterdir()
                  if p.name.endswith(".cfg"))


def resolve_path(path: str) -> str:
    if os.path.exists(path):
        return path
    cand = resources.files("heckelab").joinpath("configs", os.path.basename(path))
    if cand.is_file():
        return str(cand)
    if not path.endswith(".cfg"):
        return resolve_path(path + ".cfg")
    raise FileNotFoundError(path)


def _read(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    real = resolve_path(path)
    with open(real) as fh:
        cp.read_file(fh)
    return cp, real


def load_field(path: str):
    cp, real = _read(path)
    sec = "field" if cp.has_section("field") else "E"
    if not cp.has_section(sec):
        raise ConfigError(f"{real}: no [field] section")
    return field_from_spec(dict(cp[sec]))


def load_extension(path: str) -> ExtensionConfig:
    cp, real = _read(path)
    for sec in ("E", "F", "extension"):
        if not cp.has_section(sec):
            raise ConfigError(f"{real}: missing [{sec}] section")
    try:
        E = field_from_spec(dict(cp["E"]))
        F = field_from_spec(dict(cp["F"]))
        exsec = cp["extension"]
        emb = parse_vectors(exsec["embedding"]) if "embedding" in exsec else None
        ext = Extension(E, F, emb, name=exsec.get("name", f"{E.name}/{F.name}"))
        if "w" not in exsec:
            raise ConfigError(f"{real}: [extension] needs the basis w")
        w = [E.element(v) for v in parse_vectors(exsec["w"])]
        if len(w) != ext.n:
            raise ConfigError(f"{real}: w must have [E:F] = {ext.n} entries")
        if "A" in exsec:
            rows = parse_vectors(exsec["A"])
            A = FractionalIdeal.from_z_basis(E, rows)
        else:
            A = FractionalIdeal.unit(E)
    except (KeyError, FieldError) as exc:
        raise ConfigError(f"{real}: {exc}") from exc
    install_norm_classifier(ext)
    name = os.path.basename(real)[:-4] if real.endswith(".cfg") else os.path.basename(real)
    return ExtensionConfig(name, ext, w, A, real)
