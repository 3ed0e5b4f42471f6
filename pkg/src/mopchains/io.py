"""Serialization of arrays, matrices and run manifests.

Arrays are written as typed containers:

* ``rational``: every value is a ``"p/q"`` string;
* ``decimal``: decimal strings carrying ``digits`` significant digits;
* ``unit-rational``: each value is ``[num, den]``, two coefficient lists of
  a polynomial in one transcendental unit whose name and value are stored
  alongside.

``decode_array(encode_array(x))`` gives back ``x`` and re-encoding the
decoded values reproduces the JSON byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources

import mpmath
from mpmath import mp

from . import __version__
from .errors import DomainError
from .numerics import TranscendentalUnit, UnitPoly, UnitRatio, to_mpf

UNIT_DIGITS = 40


def _leaves(values):
    if isinstance(values, (list, tuple)):
        for v in values:
            yield from _leaves(v)
    else:
        yield values


def _map(values, fn):
    if isinstance(values, (list, tuple)):
        return [_map(v, fn) for v in values]
    return fn(values)


def _frac(text) -> Fraction:
    return Fraction(text)


def encode_array(values, digits: int = 30) -> dict:
    leaves = list(_leaves(values))
    units = {v.unit for v in leaves if isinstance(v, (UnitPoly, UnitRatio))}
    if units:
        if len(units) > 1:
            raise DomainError("an array may carry only one transcendental unit")
        unit = units.pop()

        def enc(v):
            if isinstance(v, UnitRatio):
                return [[str(c) for c in v.num.coeffs], [str(c) for c in v.den.coeffs]]
            if isinstance(v, UnitPoly):
                return [[str(c) for c in v.coeffs], ["1"]]
            return [[str(Fraction(v))], ["1"]]

        return {"encoding": "unit-rational",
                "unit": {"name": unit.name, "value": mpmath.nstr(unit.value(UNIT_DIGITS), UNIT_DIGITS)},
                "values": _map(values, enc)}
    if all(isinstance(v, (int, Fraction)) for v in leaves):
        return {"encoding": "rational", "values": _map(values, lambda v: str(Fraction(v)))}
    with mp.workdps(digits):
        return {"encoding": "decimal", "digits": digits,
                "values": _map(values, lambda v: mpmath.nstr(to_mpf(v, digits), digits))}


def _stored_unit(spec) -> TranscendentalUnit:
    text = spec["value"]
    return TranscendentalUnit(spec["name"], lambda d, text=text: mpmath.mpf(text))


def decode_array(obj: dict):
    kind = obj.get("encoding")
    if kind == "rational":
        return _map(obj["values"], _frac)
    if kind == "decimal":
        with mp.workdps(obj["digits"]):
            return _map(obj["values"], mpmath.mpf)
    if kind == "unit-rational":
        unit = _stored_unit(obj["unit"])

        def dec(pair):
            num = UnitPoly([_frac(c) for c in pair[0]], unit)
            if pair[1] == ["1"]:
                return num
            return UnitRatio(num, UnitPoly([_frac(c) for c in pair[1]], unit))

        # the leaves are [num, den] pairs, so stop one level early
        def walk(v):
            if isinstance(v, list) and len(v) == 2 and all(isinstance(x, list) and x and isinstance(x[0], str) for x in v):
                return dec(v)
            return [walk(x) for x in v]

        return walk(obj["values"])
    raise DomainError(f"unknown array encoding {kind!r}")


def decimal_view(values, digits: int = 20):
    with mp.workdps(digits):
        return _map(values, lambda v: mpmath.nstr(to_mpf(v, digits), digits))


# -- manifests and documents ---------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    parameters: dict
    mode: str
    digits: int | None = None
    truncation: int | None = None
    seed: int | None = None
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_json(self) -> dict:
        return asdict(self)


def document(kind: str, manifest: RunManifest, payload: dict) -> dict:
    return {"schema": f"mopchains/{kind}/v1", "manifest": manifest.to_json(), "payload": payload}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def payload_bytes(doc: dict) -> bytes:
    """Canonical bytes of the numeric payload (the manifest timestamp excluded)."""
    return json.dumps(doc["payload"], sort_keys=True, separators=(",", ":")).encode()


def load_schema(kind: str) -> dict:
    text = resources.files("mopchains").joinpath("schema", f"{kind}.v1.json").read_text()
    return json.loads(text)


# -- matrices --------------------------------------------------------------------


def matrix_payload(rows, digits: int = 30, **extra) -> dict:
    out = {"rows": len(rows), "cols": len(rows[0]) if rows else 0, "entries": encode_array(rows, digits),
           "decimal": decimal_view(rows)}
    out.update(extra)
    return out


def _cell(v, digits):
    if isinstance(v, (int, Fraction)):
        return str(Fraction(v))
    with mp.workdps(digits):
        return mpmath.nstr(to_mpf(v, digits), digits)


def matrix_csv(rows, manifest: RunManifest | None = None, digits: int = 20) -> str:
    buf = io.StringIO()
    if manifest is not None:
        buf.write("# manifest: " + json.dumps(manifest.to_json(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_cell(v, digits) for v in row])
    return buf.getvalue()


def read_matrix_csv(text: str):
    rows = []
    for row in csv.reader(line for line in text.splitlines() if not line.startswith("#")):
        rows.append([Fraction(c) if "." not in c and "e" not in c else mpmath.mpf(c) for c in row])
    return rows


def format_table(rows, title: str = "", width: int = 8) -> str:
    """Fixed-width table with four decimals; structural zeros print as ``0``."""
    lines = [title] if title else []
    for row in rows:
        cells = []
        for v in row:
            f = float(v)
            cells.append("0".rjust(width) if f == 0 else f"{f:.4f}".rjust(width))
        lines.append("".join(cells))
    return "\n".join(lines) + "\n"


def matrix_txt(rows, manifest: RunManifest | None = None, title: str = "") -> str:
    head = ""
    if manifest is not None:
        head = "# manifest: " + json.dumps(manifest.to_json(), sort_keys=True) + "\n"
    return head + format_table(rows, title)
