"""Finitely supported arithmetic sequences with domain metadata, plus CSV/binary IO."""
from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgument

CYCLIC, INTERVAL, COSET = "cyclic", "interval", "coset"
_DOMAIN_TAGS = {CYCLIC: 0, INTERVAL: 1, COSET: 2}
_TAG_DOMAINS = {v: k for k, v in _DOMAIN_TAGS.items()}

MAGIC = b"GWLSIG01"
_HEADER = struct.Struct("<8sIIqqq")


@dataclass(frozen=True)
class Domain:
    """Where a signal lives.

    cyclic:   Z/MZ, entry i is residue i.
    interval: [N] = {1..N}, entry i is the integer i + 1.
    coset:    {a + d*i : i < length}, the part of a + dZ inside [N].
    """

    kind: str
    length: int
    a: int = 0
    d: int = 1

    def __post_init__(self):
        if self.kind not in _DOMAIN_TAGS:
            raise InvalidArgument(f"unknown domain kind {self.kind!r}")
        if self.length < 0:
            raise InvalidArgument("domain length must be non-negative")
        if self.d < 1:
            raise InvalidArgument("coset step d must be >= 1")

    def points(self) -> np.ndarray:
        i = np.arange(self.length, dtype=np.int64)
        if self.kind == CYCLIC:
            return i
        if self.kind == INTERVAL:
            return i + 1
        return self.a + self.d * i


@dataclass(frozen=True, eq=False)
class ArithSignal:
    values: np.ndarray = field(repr=False)
    domain: Domain
    label: str = ""
    real: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1:
            raise InvalidArgument("signal values must be one-dimensional")
        if len(vals) != self.domain.length:
            raise InvalidArgument(
                f"length {len(vals)} does not match domain length {self.domain.length}")
        if not np.all(np.isfinite(vals)):
            raise InvalidArgument(f"signal {self.label!r} has non-finite values")
        if self.real:
            if np.iscomplexobj(vals):
                if np.any(vals.imag != 0):
                    raise InvalidArgument(f"signal {self.label!r} flagged real has imaginary parts")
                vals = vals.real
            vals = vals.astype(np.float64)
        elif not np.iscomplexobj(vals):
            vals = vals.astype(np.float64)
        vals = np.ascontiguousarray(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def interval(cls, values, label: str = "", real: bool | None = None) -> "ArithSignal":
        values = np.asarray(values)
        real = (not np.iscomplexobj(values)) if real is None else real
        return cls(values, Domain(INTERVAL, len(values)), label, real)

    @classmethod
    def cyclic(cls, values, label: str = "", real: bool | None = None) -> "ArithSignal":
        values = np.asarray(values)
        real = (not np.iscomplexobj(values)) if real is None else real
        return cls(values, Domain(CYCLIC, len(values)), label, real)

    @classmethod
    def coset(cls, values, a: int, d: int, label: str = "", real: bool | None = None) -> "ArithSignal":
        values = np.asarray(values)
        real = (not np.iscomplexobj(values)) if real is None else real
        return cls(values, Domain(COSET, len(values), a, d), label, real)

    def __len__(self) -> int:
        return self.domain.length

    def points(self) -> np.ndarray:
        return self.domain.points()

    def with_values(self, values, label: str | None = None) -> "ArithSignal":
        values = np.asarray(values)
        return ArithSignal(values, self.domain, self.label if label is None else label,
                           real=not np.iscomplexobj(values))

    def complex_values(self) -> np.ndarray:
        return self.values.astype(np.complex128)


# --- CSV ---------------------------------------------------------------------

def _domain_comment(sig: ArithSignal) -> str:
    dm = sig.domain
    return (f"#domain={dm.kind};length={dm.length};a={dm.a};d={dm.d};"
            f"real={int(sig.real)};label={sig.label}")


def signal_to_csv(sig: ArithSignal, path: str | Path | None = None, kind: str | None = None) -> str:
    buf = io.StringIO()
    buf.write(_domain_comment(sig) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    header = (["kind"] if kind is not None else []) + ["index", "re", "im"]
    w.writerow(header)
    vals = sig.complex_values()
    for n, v in zip(sig.points().tolist(), vals.tolist()):
        row = [n, repr(v.real), repr(v.imag)]
        w.writerow(([kind] if kind is not None else []) + row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def signal_from_csv(source: str | Path) -> ArithSignal:
    text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else str(source)
    lines = text.splitlines()
    meta = {"kind": INTERVAL, "a": "0", "d": "1", "real": "0", "label": ""}
    if lines and lines[0].startswith("#"):
        for part in lines[0][1:].split(";"):
            if "=" in part:
                key, value = part.split("=", 1)
                meta["kind" if key == "domain" else key] = value
        lines = lines[1:]
    rows = list(csv.DictReader(lines))
    vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows], dtype=np.complex128)
    real = meta["real"] == "1"
    if real:
        vals = vals.real
    dom = Domain(meta["kind"], len(vals), int(meta["a"]), int(meta["d"]))
    return ArithSignal(vals, dom, meta["label"], real)


# --- binary ------------------------------------------------------------------

def signal_to_bytes(sig: ArithSignal) -> bytes:
    dm = sig.domain
    header = _HEADER.pack(MAGIC, _DOMAIN_TAGS[dm.kind], int(sig.real), dm.length, dm.a, dm.d)
    body = sig.complex_values().astype("<c16").tobytes()
    return header + body


def signal_from_bytes(blob: bytes, label: str = "") -> ArithSignal:
    if len(blob) < _HEADER.size:
        raise InvalidArgument("truncated signal header")
    magic, tag, flags, length, a, d = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise InvalidArgument("bad magic in signal dump")
    if tag not in _TAG_DOMAINS:
        raise InvalidArgument(f"unknown domain tag {tag}")
    body = blob[_HEADER.size:]
    if len(body) != 16 * length:
        raise InvalidArgument(f"expected {16 * length} payload bytes, found {len(body)}")
    vals = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    real = bool(flags & 1)
    if real:
        vals = vals.real
    return ArithSignal(vals, Domain(_TAG_DOMAINS[tag], length, a, d), label, real)


def write_signal_binary(sig: ArithSignal, path: str | Path) -> None:
    Path(path).write_bytes(signal_to_bytes(sig))


def read_signal_binary(path: str | Path) -> ArithSignal:
    return signal_from_bytes(Path(path).read_bytes(), label=Path(path).stem)
