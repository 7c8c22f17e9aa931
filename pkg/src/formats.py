"""
JSON document formats for groupoids, elements, band operators, symbols,
mean families and boundary sets.

Groupoid documents take either the full tables
    {"units": [...], "arrows": [{"id", "s", "r"}, ...],
     "compose": [[a, b, ab], ...], "invert": [[a, a_inv], ...],
     "unit_arrows": [[unit, arrowId], ...]}          (unit_arrows optional)
or one of the shorthands {"pair": n}, {"group": {...}}, {"action": {...}},
{"union": [doc, ...]}. Element documents reference their groupoid inline
or by a path relative to the element file.
"""

import json
import logging
import os
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

from .band_z import BandOperatorZ, LaurentSymbol, parse_complex
from .convolution_algebra import AlgebraElement
from .errors import FormatError, GroupoidMismatch, LimitLabError
from .groupoid_core import (
    ActionSpec,
    FiniteGroupoid,
    GroupSpec,
    MeanFamily,
    RawGroupoid,
    cyclic_group,
    direct_product,
    disjoint_union,
    group_groupoid,
    pair_groupoid,
    symmetric_group,
    to_raw,
    transformation_groupoid,
    validate_groupoid,
)

logger = logging.getLogger(__name__)


def load_json(path: str) -> Any:
    if not os.path.exists(path):
        raise FormatError(f"file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _require_mapping(doc: Any, what: str) -> Mapping:
    if not isinstance(doc, Mapping):
        raise FormatError(f"{what} document must be a JSON object")
    return doc


# ---------------------------------------------------------------------------
# Groups and actions
# ---------------------------------------------------------------------------

def group_from_doc(doc: Any) -> GroupSpec:
    doc = _require_mapping(doc, "group")
    if "cyclic" in doc:
        return cyclic_group(int(doc["cyclic"]))
    if "symmetric" in doc:
        return symmetric_group(int(doc["symmetric"]))
    if "product" in doc:
        parts = [group_from_doc(p) for p in doc["product"]]
        if len(parts) < 2:
            raise FormatError("a product group needs at least two factors")
        result = parts[0]
        for part in parts[1:]:
            result = direct_product(result, part)
        return result
    try:
        elements = [str(e) for e in doc["elements"]]
        position = {name: k for k, name in enumerate(elements)}

        def resolve(entry) -> int:
            if isinstance(entry, int) and not isinstance(entry, bool):
                return entry
            return position[str(entry)]

        table = [[resolve(c) for c in row] for row in doc["table"]]
        identity = resolve(doc["identity"]) if "identity" in doc else None
        inverse = [resolve(c) for c in doc["inverse"]] if "inverse" in doc else None
    except (KeyError, TypeError) as exc:
        raise FormatError(f"group document needs 'elements' and 'table' over those elements: {exc}") from exc
    return GroupSpec.from_table(elements, table, identity, inverse, name=str(doc.get("name", "group")))


def action_from_doc(doc: Any) -> ActionSpec:
    doc = _require_mapping(doc, "action")
    try:
        group = group_from_doc(doc["group"])
        points = list(doc["points"])
        raw_perms = doc["perms"]
    except KeyError as exc:
        raise FormatError(f"action document needs 'group', 'points' and 'perms': missing {exc}") from exc
    if isinstance(raw_perms, Mapping):
        try:
            raw_perms = [raw_perms[name] for name in group.elements]
        except KeyError as exc:
            raise FormatError(f"no permutation given for group element {exc}") from exc
    position = {p: k for k, p in enumerate(points)}
    try:
        perms = tuple(tuple(position[p] for p in images) for images in raw_perms)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"permutation images must be declared points: {exc}") from exc
    return ActionSpec(group, tuple(points), perms, str(doc.get("name", "action")))


# ---------------------------------------------------------------------------
# Groupoids
# ---------------------------------------------------------------------------

def _label(value: Any, what: str):
    """Unit and arrow ids are JSON strings or integers"""
    if isinstance(value, str) or (isinstance(value, int) and not isinstance(value, bool)):
        return value
    raise FormatError(f"{what} must be a string or an integer, got {value!r}")


def raw_from_doc(doc: Mapping) -> RawGroupoid:
    try:
        units = [_label(u, "unit id") for u in doc["units"]]
        arrows = []
        for a in doc["arrows"]:
            arrows.append((_label(a["id"], "arrow id"), _label(a["s"], "arrow source"), _label(a["r"], "arrow range")))
        compose = [tuple(_label(c, "compose entry") for c in row) for row in doc["compose"]]
        invert = [tuple(_label(c, "invert entry") for c in row) for row in doc["invert"]]
        unit_arrows = None
        if "unit_arrows" in doc:
            unit_arrows = [tuple(_label(c, "unit_arrows entry") for c in row) for row in doc["unit_arrows"]]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"groupoid tables need units/arrows/compose/invert: {exc}") from exc
    if any(len(row) != 3 for row in compose) or any(len(row) != 2 for row in invert):
        raise FormatError("compose rows are [a, b, ab] and invert rows are [a, a_inv]")
    return RawGroupoid(units, arrows, compose, invert, unit_arrows, str(doc.get("name", "groupoid")))


def groupoid_from_doc(doc: Any, base_dir: str = ".") -> FiniteGroupoid:
    """Build a groupoid from any supported document form; tables are validated"""
    if isinstance(doc, str):
        path = doc if os.path.isabs(doc) else os.path.join(base_dir, doc)
        return load_groupoid(path)
    doc = _require_mapping(doc, "groupoid")
    try:
        if "pair" in doc:
            return pair_groupoid(int(doc["pair"]))
        if "group" in doc:
            return group_groupoid(group_from_doc(doc["group"]))
        if "action" in doc:
            return transformation_groupoid(action_from_doc(doc["action"]))
        if "union" in doc:
            return disjoint_union(*(groupoid_from_doc(part, base_dir) for part in doc["union"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, LimitLabError):
            raise
        raise FormatError(f"malformed groupoid shorthand: {exc}") from exc
    return validate_groupoid(raw_from_doc(doc))


def load_groupoid(path: str) -> FiniteGroupoid:
    g = groupoid_from_doc(load_json(path), os.path.dirname(path) or ".")
    logger.info(f"Loaded groupoid from {path}: {g.n_units} units, {g.n_arrows} arrows")
    return g


def groupoid_to_doc(g: FiniteGroupoid) -> Dict:
    raw = to_raw(g)
    return {
        "name": raw.name,
        "units": raw.units,
        "arrows": [{"id": a, "s": s, "r": r} for a, s, r in raw.arrows],
        "compose": [list(row) for row in raw.compose],
        "invert": [list(row) for row in raw.invert],
        "unit_arrows": [list(row) for row in raw.unit_arrows],
    }


# ---------------------------------------------------------------------------
# Elements, means, boundaries
# ---------------------------------------------------------------------------

def element_from_doc(doc: Any, groupoid: Optional[FiniteGroupoid] = None, base_dir: str = ".") -> AlgebraElement:
    doc = _require_mapping(doc, "element")
    if groupoid is None:
        if "groupoid" not in doc:
            raise FormatError("element document has no 'groupoid' and none was supplied")
        groupoid = groupoid_from_doc(doc["groupoid"], base_dir)
    elif "groupoid" in doc and groupoid_from_doc(doc["groupoid"], base_dir) != groupoid:
        raise GroupoidMismatch("element document names a different groupoid than the one supplied")
    coeffs = np.zeros(groupoid.n_arrows, dtype=np.complex128)
    try:
        for row in doc["coeffs"]:
            value = parse_complex(row[1:]) if len(row) == 3 else parse_complex(row[1])
            coeffs[groupoid.arrow_index(row[0])] += value
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"element coeffs must be [[arrowId, re, im], ...]: {exc}") from exc
    return AlgebraElement(groupoid, coeffs)


def load_element(path: str, groupoid: Optional[FiniteGroupoid] = None) -> AlgebraElement:
    return element_from_doc(load_json(path), groupoid, os.path.dirname(path) or ".")


def element_to_doc(f: AlgebraElement, include_groupoid: bool = False) -> Dict:
    doc = dict(f.to_dict())
    if include_groupoid:
        doc["groupoid"] = groupoid_to_doc(f.groupoid)
    return doc


def means_from_doc(doc: Any, g: FiniteGroupoid) -> List[MeanFamily]:
    doc = _require_mapping(doc, "means")
    families = []
    try:
        for entry in doc["means"]:
            weights = np.zeros((g.n_units, g.n_arrows))
            for unit, arrow, w in entry["weights"]:
                weights[g.unit_index(unit), g.arrow_index(arrow)] += float(w)
            families.append(MeanFamily(int(entry["n"]), weights))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LimitLabError):
            raise
        raise FormatError(f"means document must be {{'means': [{{'n', 'weights': [[unit, arrow, w]]}}]}}: {exc}") from exc
    return families


def boundary_from_arg(arg: str) -> List:
    """A boundary file {"boundary": [...]} or a comma-separated unit list"""
    if os.path.exists(arg):
        doc = _require_mapping(load_json(arg), "boundary")
        if "boundary" not in doc or not isinstance(doc["boundary"], list):
            raise FormatError("boundary document must be {'boundary': [unit, ...]}")
        return list(doc["boundary"])
    units = []
    for part in arg.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            units.append(int(part))
        except ValueError:
            units.append(part)
    return units


# ---------------------------------------------------------------------------
# Band operators and symbols
# ---------------------------------------------------------------------------

def load_band(path: str) -> BandOperatorZ:
    doc = _require_mapping(load_json(path), "band")
    return BandOperatorZ.from_dict(doc, name=os.path.splitext(os.path.basename(path))[0])


def symbol_from_doc(doc: Any) -> LaurentSymbol:
    doc = _require_mapping(doc, "symbol")
    try:
        rows = doc["symbol"]
        return LaurentSymbol.from_coeffs(
            (int(row[0]), parse_complex(row[1:]) if len(row) == 3 else parse_complex(row[1])) for row in rows
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"symbol document must be {{'symbol': [[m, re, im], ...]}}: {exc}") from exc


def is_symbol_doc(doc: Any) -> bool:
    return isinstance(doc, Mapping) and "symbol" in doc


def to_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, default=_json_default)


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialise {type(value).__name__}")
