"""Dataset loading, writing, and normalization.

Dense matrices travel in a plain text format: optional '#' comment lines,
a header line "F N", then F rows of N space-separated reals (UTF-8, LF).
Values are written with shortest round-trip formatting, so
load_dense(write_dense(a)) == a bit for bit. Hyperspectral cubes are raw
little-endian float64 in band-major order (bands x width x height).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError, ParseError
from .matrix import as_matrix, as_nonneg_matrix

KINDS = ("dense", "image-grid", "hyperspectral-cube")
NORMALIZATIONS = ("none", "cbcl", "unit-scale")


@dataclass(frozen=True)
class DatasetDescriptor:
    """Where a dataset lives and how to turn it into a nonnegative matrix.

    ``image-grid`` is the dense text format with one vectorized image per
    column; ``hyperspectral-cube`` needs the bands/width/height fields.
    ``expected_f``/``expected_n`` make loading fail on a shape surprise.
    """

    kind: str
    path: str
    normalization: str = "none"
    expected_f: int | None = None
    expected_n: int | None = None
    bands: int | None = None
    width: int | None = None
    height: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidInputError(
                f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}"
            )
        if self.kind == "hyperspectral-cube" and None in (self.bands, self.width, self.height):
            raise InvalidInputError("hyperspectral-cube needs bands, width, and height")


def load_dense(path):
    """Parse a dense text matrix; entries must be finite and nonnegative."""
    path = str(path)
    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if header is None:
                if len(parts) != 2:
                    raise ParseError(f"{path}:{lineno}: header must be two integers 'F N'")
                try:
                    header = (int(parts[0]), int(parts[1]))
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: header must be two integers 'F N'") from None
                if header[0] < 1 or header[1] < 1:
                    raise ParseError(f"{path}:{lineno}: dimensions must be >= 1, got {header}")
                continue
            if len(rows) == header[0]:
                raise ParseError(f"{path}:{lineno}: more data rows than the header's {header[0]}")
            if len(parts) != header[1]:
                raise ParseError(
                    f"{path}:{lineno}: expected {header[1]} values, got {len(parts)}"
                )
            values = []
            for col, p in enumerate(parts, start=1):
                try:
                    values.append(float(p))
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: column {col}: not a number: {p!r}") from None
            rows.append(values)
    if header is None:
        raise ParseError(f"{path}: no header line found")
    if len(rows) != header[0]:
        raise ParseError(f"{path}: expected {header[0]} data rows, found {len(rows)}")
    return as_nonneg_matrix(np.array(rows, dtype=np.float64), name=path)


def write_dense(path, a, comment=None):
    """Write a matrix in the dense text format (bit-exact round trip)."""
    a = as_matrix(a)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for row in a:
            fh.write(" ".join(repr(float(x)) for x in row))
            fh.write("\n")


def normalize_cbcl(images):
    """Per-column image normalization: shift/scale to mean 0.25 and standard
    deviation 0.25, then clip to [0, 1].

    A constant column has no scale; it is replaced by all 0.25 with a
    warning.
    """
    v = as_matrix(images, "images")
    mean = v.mean(axis=0)
    std = v.std(axis=0)
    flat = std == 0.0
    safe = np.where(flat, 1.0, std)
    out = np.clip((v - mean) / safe * 0.25 + 0.25, 0.0, 1.0)
    if flat.any():
        out[:, flat] = 0.25
        warnings.warn(f"{int(flat.sum())} constant column(s) replaced by 0.25", stacklevel=2)
    return out


def load_hyperspectral(path, bands, width, height):
    """Load a raw band-major cube as a (bands, width*height) matrix scaled
    so the global maximum is 1."""
    path = str(path)
    if bands < 1 or width < 1 or height < 1:
        raise DimensionError(f"cube dimensions must be >= 1, got {bands}x{width}x{height}")
    data = np.fromfile(path, dtype="<f8")
    expected = bands * width * height
    if data.size != expected:
        raise DimensionError(
            f"{path}: holds {data.size} values, expected {bands}x{width}x{height} = {expected}"
        )
    cube = as_nonneg_matrix(data.reshape(bands, width * height), name=path)
    top = cube.max()
    if top == 0.0:
        warnings.warn(f"{path}: all-zero cube, skipping unit scaling", stacklevel=2)
        return cube
    return cube / top


def unit_scale(a):
    """Divide by the global maximum so entries land in [0, 1]."""
    a = as_nonneg_matrix(a)
    top = a.max()
    if top == 0.0:
        warnings.warn("all-zero matrix, skipping unit scaling", stacklevel=2)
        return a
    return a / top


def load_dataset(desc):
    """Load per a :class:`DatasetDescriptor` and apply its normalization."""
    if desc.kind == "hyperspectral-cube":
        v = load_hyperspectral(desc.path, desc.bands, desc.width, desc.height)
    else:
        v = load_dense(desc.path)
    if desc.normalization == "cbcl":
        v = normalize_cbcl(v)
    elif desc.normalization == "unit-scale" and desc.kind != "hyperspectral-cube":
        v = unit_scale(v)
    f, n = v.shape
    if desc.expected_f is not None and f != desc.expected_f:
        raise DimensionError(f"{desc.path}: expected {desc.expected_f} rows, found {f}")
    if desc.expected_n is not None and n != desc.expected_n:
        raise DimensionError(f"{desc.path}: expected {desc.expected_n} columns, found {n}")
    return v
