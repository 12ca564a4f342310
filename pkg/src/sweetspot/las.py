"""LAS 2.0 reader/writer and curve-name canonicalization.

Only unwrapped LAS 2.0 is supported. Missing samples (the ``NULL`` sentinel of
the ~WELL section) are stored as ``nan``.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateRaw, MissingSection, NoDepthCurve, RowArity, WrappedNotSupported

log = logging.getLogger(__name__)

DEFAULT_NULL = -999.25
DEPTH_MNEMONICS = {"DEPT", "DEPTH", "MD"}


@dataclass
class LasFile:
    """One vertical well log.

    ``curves`` maps curve name to a float vector aligned with ``depth``;
    missing samples are ``nan``.
    """

    well_id: str
    depth: np.ndarray
    curves: dict[str, np.ndarray]
    location: tuple[float, float] | None = None
    null_value: float = DEFAULT_NULL
    depth_unit: str = ""
    curve_units: dict[str, str] = field(default_factory=dict)
    dropped_rows: int = 0

    def n_missing(self, name: str) -> int:
        return int(np.isnan(self.curves[name]).sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LasFile):
            return NotImplemented
        if (
            self.well_id != other.well_id
            or self.location != other.location
            or self.null_value != other.null_value
            or self.depth_unit != other.depth_unit
            or list(self.curves) != list(other.curves)
        ):
            return False
        if not np.array_equal(self.depth, other.depth):
            return False
        return all(np.array_equal(self.curves[k], other.curves[k], equal_nan=True) for k in self.curves)


@dataclass
class AliasDictionary:
    """Case-insensitive raw mnemonic -> canonical alias."""

    entries: dict[str, str] = field(default_factory=dict)

    @property
    def canonical_set(self) -> set[str]:
        return set(self.entries.values())

    def lookup(self, mnemonic: str) -> str | None:
        return self.entries.get(mnemonic.strip().casefold())

    def __len__(self) -> int:
        return len(self.entries)


def _split_header_line(line: str) -> tuple[str, str, str, str]:
    """Split ``MNEM.UNIT  DATA : DESCRIPTION`` into its four parts."""
    head, _, desc = line.partition(":")
    mnem, _, rest = head.partition(".")
    if rest[:1].isspace() or not rest:
        unit, value = "", rest
    else:
        unit, _, value = rest.partition(" ")
    return mnem.strip(), unit.strip(), value.strip(), desc.strip()


def _sections(text: str) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("~"):
            current = line[1:2].upper()
            sections.setdefault(current, [])
            continue
        if current is not None:
            sections[current].append(line)
    return sections


def parse_las(text: str) -> LasFile:
    """Parse an unwrapped LAS 2.0 document.

    Rows whose depth does not strictly increase over the last accepted row
    are dropped; the count is kept in ``LasFile.dropped_rows``.
    """
    sections = _sections(text)
    for line in sections.get("V", []):
        mnem, _, value, _ = _split_header_line(line)
        if mnem.upper() == "WRAP" and value.upper().startswith("Y"):
            raise WrappedNotSupported("wrapped LAS (WRAP=YES) is not supported")
    if "C" not in sections:
        raise MissingSection("no ~CURVE section")
    if "A" not in sections:
        raise MissingSection("no ~ASCII section")

    well = {}
    for line in sections.get("W", []):
        mnem, unit, value, _ = _split_header_line(line)
        well[mnem.upper()] = (unit, value)

    null_value = DEFAULT_NULL
    if "NULL" in well and well["NULL"][1]:
        null_value = float(well["NULL"][1])
    well_id = ""
    for key in ("UWI", "API", "WELL"):
        if well.get(key, ("", ""))[1]:
            well_id = well[key][1]
            break
    location = None
    if well.get("X", ("", ""))[1] and well.get("Y", ("", ""))[1]:
        location = (float(well["X"][1]), float(well["Y"][1]))

    names, units = [], []
    for line in sections["C"]:
        mnem, unit, _, _ = _split_header_line(line)
        names.append(mnem)
        units.append(unit)
    if not names or names[0].upper() not in DEPTH_MNEMONICS:
        raise NoDepthCurve(f"first curve is {names[0] if names else None!r}, expected a depth mnemonic")

    rows = []
    dropped = 0
    last = -np.inf
    for lineno, line in enumerate(sections["A"]):
        fields = line.split()
        if len(fields) != len(names):
            raise RowArity(f"data row {lineno}: {len(fields)} fields for {len(names)} curves")
        values = [float(f) for f in fields]
        d = values[0]
        if d == null_value or not d > last:
            dropped += 1
            continue
        last = d
        rows.append(values)
    if dropped:
        log.warning("%s: dropped %d non-increasing depth rows", well_id or "<unnamed>", dropped)

    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    data[data == null_value] = np.nan
    curves = {name: data[:, i].copy() for i, name in enumerate(names[1:], start=1)}
    return LasFile(
        well_id=well_id,
        depth=data[:, 0].copy(),
        curves=curves,
        location=location,
        null_value=null_value,
        depth_unit=units[0],
        curve_units=dict(zip(names[1:], units[1:])),
        dropped_rows=dropped,
    )


def read_las(path) -> LasFile:
    with open(path, encoding="utf-8", errors="replace") as fh:
        return parse_las(fh.read())


def to_las(f: LasFile) -> str:
    """Serialize to LAS 2.0 text that `parse_las` reads back unchanged."""
    out = io.StringIO()
    out.write("~VERSION INFORMATION\n")
    out.write(" VERS.   2.0 : CWLS LOG ASCII STANDARD - VERSION 2.0\n")
    out.write(" WRAP.   NO  : ONE LINE PER DEPTH STEP\n")
    out.write("~WELL INFORMATION\n")
    if len(f.depth):
        unit = f.depth_unit
        out.write(f" STRT.{unit} {float(f.depth[0])!r} : START DEPTH\n")
        out.write(f" STOP.{unit} {float(f.depth[-1])!r} : STOP DEPTH\n")
    out.write(f" NULL.  {float(f.null_value)!r} : NULL VALUE\n")
    out.write(f" UWI.   {f.well_id} : UNIQUE WELL ID\n")
    if f.location is not None:
        out.write(f" X.m    {float(f.location[0])!r} : SURFACE EASTING\n")
        out.write(f" Y.m    {float(f.location[1])!r} : SURFACE NORTHING\n")
    out.write("~CURVE INFORMATION\n")
    out.write(f" DEPT.{f.depth_unit} : DEPTH\n")
    for name in f.curves:
        out.write(f" {name}.{f.curve_units.get(name, '')} : \n")
    out.write("~ASCII\n")
    null = repr(float(f.null_value))
    cols = [f.depth] + list(f.curves.values())
    for i in range(len(f.depth)):
        out.write(" ".join(null if np.isnan(c[i]) else repr(float(c[i])) for c in cols))
        out.write("\n")
    return out.getvalue()


def load_dictionary(text: str) -> AliasDictionary:
    """Read a ``raw,alias`` CSV into an `AliasDictionary`.

    Raw keys are case-folded. Every alias is also registered as a key mapping
    to itself.
    """
    entries: dict[str, str] = {}

    def put(raw: str, alias: str) -> None:
        key = raw.strip().casefold()
        prev = entries.get(key)
        if prev is not None and prev != alias:
            raise DuplicateRaw(f"{raw!r} maps to both {prev!r} and {alias!r}")
        entries[key] = alias

    reader = csv.DictReader(io.StringIO(text))
    pairs = [(row["raw"], row["alias"].strip()) for row in reader if row.get("raw")]
    for raw, alias in pairs:
        put(raw, alias)
    for alias in sorted({a for _, a in pairs}):
        put(alias, alias)
    return AliasDictionary(entries)


def apply_dictionary(f: LasFile, dictionary: AliasDictionary) -> tuple[LasFile, list[str]]:
    """Rename curves to canonical aliases.

    Returns the renamed file and the list of curve names that had no entry.
    When several curves share an alias, the one with fewest missing samples
    wins (first in file order on ties).
    """
    chosen: dict[str, str] = {}
    skipped = []
    for name in f.curves:
        alias = dictionary.lookup(name)
        if alias is None:
            skipped.append(name)
            continue
        current = chosen.get(alias)
        if current is None or f.n_missing(name) < f.n_missing(current):
            chosen[alias] = name
    curves = {alias: f.curves[name] for alias, name in chosen.items()}
    units = {alias: f.curve_units.get(name, "") for alias, name in chosen.items()}
    renamed = LasFile(
        well_id=f.well_id,
        depth=f.depth,
        curves=curves,
        location=f.location,
        null_value=f.null_value,
        depth_unit=f.depth_unit,
        curve_units=units,
        dropped_rows=f.dropped_rows,
    )
    return renamed, skipped
