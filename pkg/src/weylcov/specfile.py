"""Channel spec and Kraus file formats (JSON).

Channel spec::

    {"d": 3, "family": {"name": "depolarizing", "lambda": [0.5, 0.0]}}
    {"d": 2, "family": {"name": "dephasing", "generator": [0, 1]}}
    {"d": 6, "family": {"name": "ab", "generators": [[2, 0], [0, 3]], "a": 0.2, "b": 0.3}}
    {"d": 2, "p": [[0.4, 0], [0.3, 0], [0.2, 0], [0.1, 0]]}
    {"d": 2, "phi": [[1, 0], ...]}

Exactly one of ``family``, ``phi`` and ``p``.  ``phi``/``p`` lists hold d^2
``[re, im]`` pairs in canonical order (index x*d + y); plain numbers are
accepted as real values.

Kraus file::

    {"dims": [d_out, d_in], "operators": [[[re, im], ...row-major...], ...]}
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .covariant import ABFamilySpec, WeylChannel, ab_family, dephasing_channel, depolarizing, from_p, from_phi
from .zgroup import GroupElement, generated_subgroup

CHANNEL_KEYS = ("family", "phi", "p")


class SpecError(ValueError):
    """Malformed spec document; ``where`` names the offending field."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


def _complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise SpecError(where, "expected a number or [re, im]")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise SpecError(where, f"expected a number or [re, im], got {value!r}")


def _element(value, d: int, where: str) -> GroupElement:
    if not (isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise SpecError(where, f"expected an integer pair [x, y], got {value!r}")
    return GroupElement(value[0], value[1], d)


def _complex_list(values, d: int, where: str) -> np.ndarray:
    if not isinstance(values, list) or len(values) != d * d:
        n = len(values) if isinstance(values, list) else "non-list"
        raise SpecError(where, f"expected {d * d} entries, got {n}")
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(values)]).reshape(d, d)


def _line_hint(err: json.JSONDecodeError) -> str:
    return f"line {err.lineno} column {err.colno}: {err.msg}"


def load_document(path) -> tuple[dict, str]:
    """Parse a JSON document; returns it with the sha256 of the raw bytes."""
    raw = Path(path).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as err:
        raise SpecError(str(path), _line_hint(err)) from err
    if not isinstance(doc, dict):
        raise SpecError(str(path), "top level must be an object")
    return doc, digest


def parse_channel_spec(doc: dict) -> WeylChannel:
    if "d" not in doc:
        raise SpecError("d", "missing dimension")
    d = doc["d"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise SpecError("d", f"expected an integer >= 2, got {d!r}")
    present = [k for k in CHANNEL_KEYS if k in doc]
    if len(present) != 1:
        raise SpecError(
            "/".join(CHANNEL_KEYS),
            f"exactly one of family, phi, p is required; found {present or 'none'}",
        )
    unknown = set(doc) - {"d", *CHANNEL_KEYS, "comment"}
    if unknown:
        raise SpecError(",".join(sorted(unknown)), "unknown field")
    key = present[0]
    try:
        if key == "phi":
            return from_phi(d, _complex_list(doc["phi"], d, "phi"))
        if key == "p":
            return from_p(d, _complex_list(doc["p"], d, "p"))
        return _parse_family(doc["family"], d)
    except SpecError:
        raise
    except ValueError as err:
        raise SpecError(key, str(err)) from err


def _parse_family(fam, d: int) -> WeylChannel:
    if not isinstance(fam, dict) or "name" not in fam:
        raise SpecError("family", "expected an object with a 'name'")
    name = fam["name"]
    if name == "depolarizing":
        if "lambda" not in fam:
            raise SpecError("family.lambda", "missing")
        return depolarizing(d, _complex(fam["lambda"], "family.lambda"))
    if name == "dephasing":
        if "generator" not in fam:
            raise SpecError("family.generator", "missing")
        return dephasing_channel(d, _element(fam["generator"], d, "family.generator"))
    if name == "ab":
        for k in ("generators", "a", "b"):
            if k not in fam:
                raise SpecError(f"family.{k}", "missing")
        gens = fam["generators"]
        if not isinstance(gens, list):
            raise SpecError("family.generators", "expected a list of [x, y] pairs")
        g = generated_subgroup([_element(v, d, f"family.generators[{i}]") for i, v in enumerate(gens)], d)
        spec = ABFamilySpec(d, g, _complex(fam["a"], "family.a"), _complex(fam["b"], "family.b"))
        return ab_family(spec)
    raise SpecError("family.name", f"unknown family {name!r}")


def load_channel_spec(path) -> tuple[WeylChannel, str]:
    doc, digest = load_document(path)
    return parse_channel_spec(doc), digest


def parse_kraus_document(doc: dict) -> list[np.ndarray]:
    dims = doc.get("dims")
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(v, int) and v > 0 for v in dims)):
        raise SpecError("dims", f"expected [d_out, d_in], got {dims!r}")
    d_out, d_in = dims
    ops = doc.get("operators")
    if not isinstance(ops, list) or not ops:
        raise SpecError("operators", "expected a non-empty list")
    out = []
    for k, op in enumerate(ops):
        where = f"operators[{k}]"
        flat = op
        if isinstance(op, list) and op and isinstance(op[0], list) and op[0] and isinstance(op[0][0], list):
            flat = [entry for row in op for entry in row]
        if not isinstance(flat, list) or len(flat) != d_out * d_in:
            raise SpecError(where, f"expected {d_out * d_in} entries")
        vals = [_complex(v, f"{where}[{i}]") for i, v in enumerate(flat)]
        out.append(np.array(vals).reshape(d_out, d_in))
    return out


def load_kraus_file(path) -> tuple[list[np.ndarray], str]:
    doc, digest = load_document(path)
    return parse_kraus_document(doc), digest


def complex_pairs(arr) -> list:
    """Nested [re, im] lists mirroring ``arr``'s shape."""
    arr = np.asarray(arr, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [complex_pairs(a) for a in arr]


def kraus_document(kraus) -> dict:
    K = [np.asarray(k, dtype=complex) for k in kraus]
    return {"dims": list(K[0].shape), "operators": [complex_pairs(k) for k in K]}


def channel_document(c: WeylChannel) -> dict:
    return {"d": c.d, "p": complex_pairs(c.p.ravel())}
