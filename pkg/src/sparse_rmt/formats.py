"""Plain-text file formats.

matrix      first line ``n m``, then ``n*m`` lines ``re im`` in row-major order
spectrum    one eigenvalue per line, ``re im``
singular    one singular value per line, nonincreasing
deformation JSON object ``{"u": [[[re, im], ...], ...], "v": [...]}``, one
            inner array per rank-one term

Floats are written with ``repr`` so that reading them back is exact.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ensemble import Deformation, basis_vector, constant_vector, random_unit_vector
from .errors import ConfigurationError

__all__ = [
    "write_matrix",
    "read_matrix",
    "write_spectrum",
    "read_spectrum",
    "write_singular_values",
    "write_deformation",
    "read_deformation",
    "parse_complex",
    "complex_pair",
    "vector_from_description",
    "deformation_from_description",
]


def _pair(z) -> str:
    z = complex(z)
    return f"{z.real!r} {z.imag!r}"


def write_matrix(path, m) -> None:
    """Write `m` to a path or an open text stream."""
    m = np.atleast_2d(np.asarray(m))
    rows, cols = m.shape
    if hasattr(path, "write"):
        path.write(f"{rows} {cols}\n")
        path.writelines(_pair(z) + "\n" for z in m.ravel())
        return
    with open(path, "w") as fh:
        write_matrix(fh, m)


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ConfigurationError(f"{path}: header must be 'n m'")
        rows, cols = int(header[0]), int(header[1])
        data = np.loadtxt(fh, ndmin=2) if rows * cols else np.zeros((0, 2))
    if data.shape != (rows * cols, 2):
        raise ConfigurationError(f"{path}: expected {rows * cols} lines of 're im', got {data.shape[0]}")
    z = data[:, 0] + 1j * data[:, 1]
    if not np.any(data[:, 1]):
        z = data[:, 0].copy()
    return z.reshape(rows, cols)


def write_spectrum(path, values) -> None:
    with open(path, "w") as fh:
        fh.writelines(_pair(z) + "\n" for z in np.asarray(values).ravel())


def read_spectrum(path) -> np.ndarray:
    data = np.loadtxt(path, ndmin=2)
    return data[:, 0] + 1j * data[:, 1]


def write_singular_values(path, values) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{float(s)!r}\n" for s in values)


def complex_pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def parse_complex(value) -> complex:
    """Accept ``[re, im]``, a number, or a Python complex literal such as ``"1.5+0.8j"``."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigurationError(f"complex pair must have two entries, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ConfigurationError(f"cannot parse complex number {value!r}") from None
    return complex(value)


def write_deformation(path, defm: Deformation) -> None:
    doc = {
        "u": [[complex_pair(x) for x in u] for u, _ in defm.pairs],
        "v": [[complex_pair(x) for x in v] for _, v in defm.pairs],
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def read_deformation(path) -> Deformation:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "u" not in doc or "v" not in doc:
        raise ConfigurationError(f"{path}: deformation file needs arrays 'u' and 'v'")
    if len(doc["u"]) != len(doc["v"]):
        raise ConfigurationError(f"{path}: 'u' and 'v' must have the same number of vectors")
    pairs = [
        (np.array([parse_complex(p) for p in u]), np.array([parse_complex(p) for p in v]))
        for u, v in zip(doc["u"], doc["v"])
    ]
    return Deformation(pairs)


def vector_from_description(desc: dict, n: int, u: np.ndarray | None = None) -> np.ndarray:
    """Build a length-n vector from a small JSON description.

    kinds: ``basis`` (``index``), ``random_unit`` (``seed``, ``complex``),
    ``constant`` (entries 1/sqrt(n)), ``same_as_u`` (reuse the paired u),
    ``values`` (explicit ``[re, im]`` list).  Every kind accepts ``scale``.
    """
    kind = desc.get("kind")
    scale = parse_complex(desc.get("scale", 1.0))
    if kind == "basis":
        vec = basis_vector(n, int(desc.get("index", 0)))
    elif kind == "random_unit":
        vec = random_unit_vector(n, int(desc["seed"]), bool(desc.get("complex", False)))
    elif kind == "constant":
        vec = constant_vector(n)
    elif kind == "same_as_u":
        if u is None:
            raise ConfigurationError("'same_as_u' is only valid for v vectors")
        vec = u / np.linalg.norm(u)
    elif kind == "values":
        vec = np.array([parse_complex(p) for p in desc["values"]])
        if len(vec) != n:
            raise ConfigurationError(f"explicit vector has length {len(vec)}, expected {n}")
    else:
        raise ConfigurationError(f"unknown vector kind {kind!r}")
    return scale * vec


def deformation_from_description(desc: dict, n: int, base_dir=None) -> Deformation:
    """Deformation from ``{"file": path}`` or ``{"pairs": [{"u": ..., "v": ...}, ...]}``."""
    if "file" in desc:
        path = Path(desc["file"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        defm = read_deformation(path)
        if defm.n != n:
            raise ConfigurationError(f"deformation has size {defm.n}, matrix has size {n}")
        return defm
    pairs = []
    for item in desc.get("pairs", []):
        u = vector_from_description(item["u"], n)
        pairs.append((u, vector_from_description(item["v"], n, u)))
    return Deformation(pairs)
