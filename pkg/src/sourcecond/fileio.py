"""Bit-exact artifact I/O: 16-bit graymaps, float maps, CSV series, manifests.

Graymaps (``pgm16``) are for inspection and carry their min-max scaling in a
sidecar JSON; float maps (``pfm``) and CSV series are the lossless carriers
for certificates, dual fields and masks.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


def _float_repr(x) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# portable graymap (P5, 16 bit) with scaling sidecar


def write_pgm16(path: str, array: np.ndarray) -> None:
    array = np.asarray(array, dtype=float)
    if array.ndim != 2:
        raise InputError("pgm16 arrays must be 2D")
    if not np.all(np.isfinite(array)):
        raise InputError("pgm16 arrays must be finite")
    lo, hi = float(array.min()), float(array.max())
    if hi > lo:
        scaled = np.round((array - lo) / (hi - lo) * 65535.0)
    else:
        scaled = np.zeros_like(array)
    h, w = array.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        f.write(scaled.astype(">u2").tobytes())
    with open(path + ".json", "w", encoding="ascii") as f:
        json.dump({"min": lo, "max": hi}, f, sort_keys=True)
        f.write("\n")


def _read_pnm_header(f):
    def token():
        tok = b""
        while True:
            c = f.read(1)
            if not c:
                raise InputError("truncated header")
            if c.isspace():
                if tok:
                    return tok
                continue
            if c == b"#":
                while f.read(1) not in (b"\n", b""):
                    pass
                continue
            tok += c

    magic = token()
    w, h, maxval = int(token()), int(token()), int(token())
    return magic, w, h, maxval


def read_pgm16(path: str) -> np.ndarray:
    """Read a P5 graymap; restores float values from the sidecar when present."""
    with open(path, "rb") as f:
        magic, w, h, maxval = _read_pnm_header(f)
        if magic != b"P5":
            raise InputError(f"not a P5 graymap: {path}")
        dtype = ">u2" if maxval > 255 else np.uint8
        raw = np.frombuffer(f.read(), dtype=dtype, count=w * h).reshape(h, w)
    sidecar = path + ".json"
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="ascii") as f:
            meta = json.load(f)
        lo, hi = meta["min"], meta["max"]
        if hi > lo:
            return lo + raw.astype(float) / maxval * (hi - lo)
        return np.full(raw.shape, lo, dtype=float)
    return raw.astype(float) / maxval


# ---------------------------------------------------------------------------
# portable floatmap (Pf/PF, float32 little-endian, bottom-up rows)


def write_pfm(path: str, array: np.ndarray) -> None:
    array = np.asarray(array, dtype=np.float32)
    if array.ndim == 2:
        magic, data = "Pf", array[:, :, None]
    elif array.ndim == 3 and array.shape[2] in (2, 3):
        if array.shape[2] == 2:  # pad two-channel fields to PF color
            array = np.concatenate([array, np.zeros_like(array[:, :, :1])], axis=2)
        magic, data = "PF", array
    else:
        raise InputError("pfm arrays must be 2D or have 2 or 3 channels")
    h, w = data.shape[:2]
    with open(path, "wb") as f:
        f.write(f"{magic}\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(data[::-1].astype("<f4").tobytes())


def read_pfm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic not in (b"Pf", b"PF"):
            raise InputError(f"not a floatmap: {path}")
        w, h = (int(t) for t in f.readline().split())
        scale = float(f.readline())
        channels = 3 if magic == b"PF" else 1
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(f.read(), dtype=dtype, count=w * h * channels)
    data = data.reshape(h, w, channels)[::-1]
    return data[:, :, 0] if channels == 1 else data


def field_from_pfm(array: np.ndarray) -> np.ndarray:
    """Drop the zero padding channel of a two-channel field stored as PF."""
    if array.ndim != 3 or array.shape[2] != 3:
        raise InputError("expected a 3-channel floatmap")
    return np.ascontiguousarray(array[:, :, :2].astype(float))


def write_image(path: str, array: np.ndarray, format: str = "pfm") -> None:
    """Write an array as ``pgm16`` (scaled graymap + sidecar) or ``pfm`` (exact)."""
    if format == "pgm16":
        write_pgm16(path, array)
    elif format == "pfm":
        write_pfm(path, array)
    else:
        raise InputError(f"unknown image format {format!r}")


def load_grayscale(path: str) -> np.ndarray:
    """Load a grayscale image from PNM/PFM files, normalized to [0, 1].

    Color inputs are collapsed with the Rec. 601 luma weights.
    """
    with open(path, "rb") as f:
        magic = f.read(2)
    if magic in (b"Pf", b"PF"):
        img = read_pfm(path)
        if img.ndim == 3:
            img = img @ np.array([0.299, 0.587, 0.114])
    elif magic == b"P5":
        img = read_pgm16(path)
    elif magic in (b"P6", b"P2", b"P3"):
        img = _read_pnm_generic(path)
    else:
        raise InputError(f"unsupported image file {path!r} (use PGM/PPM/PFM)")
    img = np.asarray(img, dtype=float)
    lo, hi = float(img.min()), float(img.max())
    return (img - lo) / (hi - lo) if hi > lo else np.zeros_like(img)


def _read_pnm_generic(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        magic, w, h, maxval = _read_pnm_header(f)
        if magic in (b"P2", b"P3"):
            values = np.array(f.read().split(), dtype=float)
        else:
            dtype = ">u2" if maxval > 255 else np.uint8
            channels = 3 if magic == b"P6" else 1
            values = np.frombuffer(f.read(), dtype=dtype, count=w * h * channels).astype(float)
    values = values / maxval
    if magic in (b"P3", b"P6"):
        rgb = values.reshape(h, w, 3)
        return rgb @ np.array([0.299, 0.587, 0.114])
    return values.reshape(h, w)


# ---------------------------------------------------------------------------
# CSV series (RFC 4180, 17 significant digits)


def write_series_csv(path: str, columns: dict) -> None:
    """Write named, equal-length columns; floats keep 17 significant digits."""
    import csv

    names = list(columns)
    if not names:
        raise InputError("no columns to write")
    arrays = [np.asarray(columns[name]) for name in names]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise InputError("columns must have equal length")
    with open(path, "w", newline="", encoding="ascii") as f:
        writer = csv.writer(f)
        writer.writerow(names)
        for i in range(length):
            row = []
            for a in arrays:
                x = a[i]
                if isinstance(x, (np.integer, int)):
                    row.append(str(int(x)))
                else:
                    row.append(_float_repr(x))
            writer.writerow(row)


def read_series_csv(path: str) -> dict:
    import csv

    with open(path, "r", newline="", encoding="ascii") as f:
        reader = csv.reader(f)
        names = next(reader)
        cols = {name: [] for name in names}
        for row in reader:
            for name, cell in zip(names, row):
                cols[name].append(float(cell))
    return {name: np.array(vals) for name, vals in cols.items()}


# ---------------------------------------------------------------------------
# canonical configs and run manifests


def canonical_config_bytes(config: dict) -> bytes:
    """Canonical serialization: stable under key reordering."""
    return json.dumps(config, sort_keys=True, separators=(",", ":")).encode("ascii")


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_config_bytes(config)).hexdigest()


def tool_versions() -> str:
    from . import __version__

    return (f"sourcecond {__version__}, numpy {np.__version__}, "
            f"python {platform.python_version()}")


@dataclass
class RunManifest:
    """Audit record for one run: inputs, outputs, and wall-clock timings."""

    command: str
    config_hash: str
    seed: int
    artifacts: list = field(default_factory=list)
    versions: str = ""
    timings: dict = field(default_factory=dict)


def write_manifest(out_dir: str, manifest: RunManifest) -> str:
    """Persist the manifest after checking every listed artifact exists."""
    missing = [a for a in manifest.artifacts
               if not os.path.exists(os.path.join(out_dir, a))]
    if missing:
        raise InputError(f"manifest lists missing artifacts: {missing}")
    if not manifest.versions:
        manifest.versions = tool_versions()
    path = os.path.join(out_dir, "manifest.json")
    payload = {
        "command": manifest.command,
        "config_hash": manifest.config_hash,
        "seed": manifest.seed,
        "artifacts": sorted(manifest.artifacts),
        "versions": manifest.versions,
        "timings": manifest.timings,
    }
    with open(path, "w", encoding="ascii") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")
    return path


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="ascii") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")
