"""JSON files for surfaces and decorated coordinates.

Surface file::

    {"version": "superteich-v1", "genus": 1, "punctures": 1,
     "triangles": [[0, 1, 2], [0, 1, 2]], "corners": [[0, 0, 0], [0, 0, 0]],
     "orientation": [1, -1, 1]}

Coordinates file::

    {"version": "superteich-v1", "num_generators": 2,
     "lambda": [1.5, "2.0 + 0.1*g1g2", 0.7],
     "mu": [[[1, 0.3]], [[2, -1.2]]]}

Edge, triangle and puncture ids are 0-based.  A lambda-length is a number or
a supernumber in text form.  Each mu is a list of ``[generator, coefficient]``
pairs with 1-based generator indices, or a text string.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

from . import surface as sf
from . import teich
from .grassmann import GrassmannNumber, parse, to_text

VERSION = "superteich-v1"


class FormatError(ValueError):
    """Input file is unreadable or does not follow the schema."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise FormatError(msg)


def _check_version(data: Any, what: str) -> None:
    _require(isinstance(data, dict), f"{what}: top level must be an object")
    _require(data.get("version") == VERSION, f"{what}: version must be {VERSION!r}, got {data.get('version')!r}")


def _int_rows(rows: Any, what: str) -> tuple[tuple[int, int, int], ...]:
    _require(isinstance(rows, list), f"{what} must be a list")
    out = []
    for r in rows:
        _require(isinstance(r, list) and len(r) == 3 and all(isinstance(x, int) and not isinstance(x, bool) for x in r),
                 f"{what}: every entry must be three integers, got {r!r}")
        out.append(tuple(r))
    return tuple(out)


def surface_from_dict(data: Any) -> tuple[sf.Triangulation, sf.Orientation | None]:
    _check_version(data, "surface")
    for key in ("genus", "punctures", "triangles", "corners"):
        _require(key in data, f"surface: missing field {key!r}")
    g, s = data["genus"], data["punctures"]
    _require(isinstance(g, int) and isinstance(s, int) and g >= 0 and s >= 1, "surface: genus >= 0 and punctures >= 1 are required")
    t = sf.Triangulation(g, s, _int_rows(data["triangles"], "triangles"), _int_rows(data["corners"], "corners"))
    o = data.get("orientation")
    if o is not None:
        _require(isinstance(o, list) and all(x in (1, -1) for x in o), "orientation must be a list of +1/-1")
        o = tuple(o)
    return t, o


def surface_to_dict(t: sf.Triangulation, o=None) -> dict:
    out = {
        "version": VERSION,
        "genus": t.genus,
        "punctures": t.num_punctures,
        "triangles": [list(x) for x in t.triangles],
        "corners": [list(x) for x in t.corners],
    }
    if o is not None:
        out["orientation"] = list(o)
    return out


def _grassmann_in(x: Any, n: int, what: str) -> GrassmannNumber:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return GrassmannNumber.scalar(float(x), n)
    if isinstance(x, str):
        try:
            return parse(x, n)
        except ValueError as exc:
            raise FormatError(f"{what}: {exc}") from exc
    if isinstance(x, list):
        total = GrassmannNumber.zero(n)
        for pair in x:
            _require(isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], int)
                     and isinstance(pair[1], (int, float)), f"{what}: expected [generator, coefficient] pairs")
            _require(1 <= pair[0] <= n, f"{what}: generator {pair[0]} outside 1..{n}")
            total = total + GrassmannNumber.generator(pair[0], n, float(pair[1]))
        return total
    raise FormatError(f"{what}: unsupported value {x!r}")


def _mu_out(x: GrassmannNumber):
    if all(bin(int(m)).count("1") == 1 for m in x.masks):
        return [[int(m).bit_length(), float(c)] for m, c in zip(x.masks, x.coeffs)]
    return to_text(x)


def _lam_out(x: GrassmannNumber):
    return x.body if x.soul.is_zero() else to_text(x)


def coords_from_dict(data: Any) -> teich.DecoratedCoords:
    _check_version(data, "coordinates")
    for key in ("num_generators", "lambda", "mu"):
        _require(key in data, f"coordinates: missing field {key!r}")
    n = data["num_generators"]
    _require(isinstance(n, int) and 0 <= n <= 64, "num_generators must be an integer in 0..64")
    _require(isinstance(data["lambda"], list) and isinstance(data["mu"], list), "lambda and mu must be lists")
    lam = [_grassmann_in(x, n, f"lambda[{k}]") for k, x in enumerate(data["lambda"])]
    mu = [_grassmann_in(x, n, f"mu[{k}]") for k, x in enumerate(data["mu"])]
    try:
        return teich.DecoratedCoords(n, tuple(lam), tuple(mu))
    except ValueError as exc:
        raise FormatError(f"coordinates: {exc}") from exc


def coords_to_dict(c: teich.DecoratedCoords) -> dict:
    return {
        "version": VERSION,
        "num_generators": c.n,
        "lambda": [_lam_out(x) for x in c.lam],
        "mu": [_mu_out(x) for x in c.mu],
    }


def read_json(path: str | os.PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_surface(path) -> tuple[sf.Triangulation, sf.Orientation | None]:
    return surface_from_dict(read_json(path))


def load_coords(path) -> teich.DecoratedCoords:
    return coords_from_dict(read_json(path))


def save_surface(path, t: sf.Triangulation, o=None) -> None:
    write_atomic(path, dumps(surface_to_dict(t, o)))


def save_coords(path, c: teich.DecoratedCoords) -> None:
    write_atomic(path, dumps(coords_to_dict(c)))
