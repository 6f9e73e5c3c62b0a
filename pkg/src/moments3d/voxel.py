"""Molecule ingestion, rasterization and binvox I/O."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

# van der Waals radii in angstroms (Bondi).
VDW_RADII: dict[str, float] = {
    "H": 1.20,
    "C": 1.70,
    "N": 1.55,
    "O": 1.52,
    "S": 1.80,
    "P": 1.80,
    "F": 1.47,
    "Cl": 1.75,
    "Br": 1.85,
    "I": 1.98,
}
FALLBACK_RADIUS = 1.5

DEFAULT_GRID = 64
DEFAULT_MARGIN = 0.05


class XYZParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BinvoxError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    element: str
    position: tuple[float, float, float]

    def __post_init__(self):
        if not self.element or not self.element.isascii() or not self.element.isalpha():
            raise ValueError(f"invalid element symbol {self.element!r}")
        if not all(math.isfinite(c) for c in self.position):
            raise ValueError(f"non-finite coordinate for {self.element}")


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    name: str | None = None

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise ValueError("a molecule needs at least one atom")

    @property
    def coordinates(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms], dtype=np.float64)

    @property
    def elements(self) -> list[str]:
        return [a.element for a in self.atoms]

    def translated(self, shift: Sequence[float]) -> "Molecule":
        dx, dy, dz = shift
        atoms = tuple(
            Atom(a.element, (a.position[0] + dx, a.position[1] + dy, a.position[2] + dz))
            for a in self.atoms
        )
        return Molecule(atoms, self.name)


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Cubic occupancy field ``values[x, y, z]`` on an ``n**3`` lattice.

    ``translate`` and ``scale`` follow the binvox convention: the normalized
    lattice coordinate ``(index + 0.5) / n`` maps to world space through
    ``world = normalized * scale + translate``.
    """

    values: np.ndarray
    translate: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 3 or len(set(v.shape)) != 1:
            raise ValueError(f"voxel grid must be cubic, got shape {v.shape}")
        if v.shape[0] < 2:
            raise ValueError("voxel grid needs n >= 2")
        if not np.all(np.isfinite(v)) or v.min(initial=0.0) < 0.0 or v.max(initial=0.0) > 1.0:
            raise ValueError("voxel values must be finite and within [0, 1]")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("scale must be a positive real")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "translate", tuple(float(t) for t in self.translate))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (
            self.n == other.n
            and self.translate == other.translate
            and self.scale == other.scale
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def occupancy(self) -> np.ndarray:
        """Binary occupancy thresholded at 0.5, as written to binvox."""
        return self.values >= 0.5


_XYZ_LINE = re.compile(r"\s+")


def parse_xyz(text: str, name: str | None = None) -> Molecule:
    """Parse an XYZ file: atom count, comment line, then ``symbol x y z`` rows."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise XYZParseError("empty file", 1)
    try:
        declared = int(lines[0].strip())
    except ValueError:
        raise XYZParseError(f"atom count {lines[0].strip()!r} is not an integer", 1) from None
    if declared < 1:
        raise XYZParseError(f"declared {declared} atoms", 1)
    comment = lines[1].strip() if len(lines) > 1 else ""

    atoms = []
    for lineno, raw in enumerate(lines[2:], start=3):
        if not raw.strip():
            continue
        parts = _XYZ_LINE.split(raw.strip())
        if len(parts) < 4:
            raise XYZParseError(f"expected 'symbol x y z', got {raw.strip()!r}", lineno)
        symbol = parts[0]
        try:
            xyz = tuple(float(p) for p in parts[1:4])
        except ValueError:
            raise XYZParseError(f"non-numeric coordinate in {raw.strip()!r}", lineno) from None
        try:
            atoms.append(Atom(symbol, xyz))
        except ValueError as exc:
            raise XYZParseError(str(exc), lineno) from None
        if len(atoms) > declared:
            raise XYZParseError(f"declared {declared} atoms, found more", lineno)
    if len(atoms) != declared:
        raise XYZParseError(f"declared {declared} atoms, found {len(atoms)}", len(lines))
    return Molecule(tuple(atoms), name or comment or None)


def voxelize(
    mol: Molecule,
    n: int = DEFAULT_GRID,
    mode: str = "sphere",
    radii: Mapping[str, float] | None = None,
    margin: float = DEFAULT_MARGIN,
) -> VoxelGrid:
    """Rasterize ``mol`` into an ``n**3`` binary grid.

    The bounding box of the atom centres (inflated by each atom's radius in
    sphere mode) is scaled uniformly so that its longest edge spans
    ``n * (1 - 2 * margin)`` voxels, and centred in the cube.  In point mode
    the voxel containing each atom centre is set; in sphere mode every voxel
    whose centre lies within an atom's scaled radius is set.

    With the bundled radius table, unlisted elements fall back to
    :data:`FALLBACK_RADIUS`; an explicit ``radii`` table must cover every
    element or ``KeyError`` is raised.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 <= margin <= 0.45:
        raise ValueError("margin must lie in [0, 0.45]")
    if mode not in ("point", "sphere"):
        raise ValueError(f"unknown voxelization mode {mode!r}")

    coords = mol.coordinates
    if mode == "sphere":
        r = np.empty(len(mol.atoms))
        for i, el in enumerate(mol.elements):
            if radii is None:
                r[i] = VDW_RADII.get(el, FALLBACK_RADIUS)
            elif el in radii:
                r[i] = radii[el]
            else:
                raise KeyError(f"no radius for element {el!r}")
        lo = (coords - r[:, None]).min(axis=0)
        hi = (coords + r[:, None]).max(axis=0)
    else:
        r = np.zeros(len(mol.atoms))
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)

    center = (lo + hi) / 2.0
    extent = float((hi - lo).max())
    # voxels per angstrom; a zero-extent molecule just sits at the grid centre
    s = n * (1.0 - 2.0 * margin) / extent if extent > 0 else 1.0
    g = (coords - center) * s + n / 2.0

    values = np.zeros((n, n, n), dtype=np.float64)
    if mode == "point":
        idx = np.clip(np.floor(g).astype(np.int64), 0, n - 1)
        values[idx[:, 0], idx[:, 1], idx[:, 2]] = 1.0
    else:
        centres = np.arange(n) + 0.5
        for gi, ri in zip(g, r * s):
            lo_i = np.clip(np.floor(gi - ri - 0.5).astype(int), 0, n)
            hi_i = np.clip(np.ceil(gi + ri + 0.5).astype(int), 0, n)
            dx = (centres[lo_i[0]:hi_i[0]] - gi[0]) ** 2
            dy = (centres[lo_i[1]:hi_i[1]] - gi[1]) ** 2
            dz = (centres[lo_i[2]:hi_i[2]] - gi[2]) ** 2
            inside = dx[:, None, None] + dy[None, :, None] + dz[None, None, :] <= ri * ri
            block = values[lo_i[0]:hi_i[0], lo_i[1]:hi_i[1], lo_i[2]:hi_i[2]]
            block[inside] = 1.0

    scale = n / s
    translate = tuple(center - (n / 2.0) / s)
    return VoxelGrid(values, translate, scale)


def _header_field(line: bytes, key: bytes) -> list[bytes]:
    parts = line.split()
    if not parts or parts[0] != key:
        raise BinvoxError(f"expected {key.decode()!r} header line, got {line[:40]!r}")
    return parts[1:]


def read_binvox(data: bytes) -> VoxelGrid:
    """Decode a binvox v1 byte string (voxel order: y fastest, then z, then x)."""
    if not data.startswith(b"#binvox"):
        raise BinvoxError("bad magic: not a binvox file")
    pos = 0
    header = []
    while True:
        end = data.find(b"\n", pos)
        if end < 0:
            raise BinvoxError("truncated header")
        line = data[pos:end].strip()
        pos = end + 1
        if line == b"data":
            break
        header.append(line)
    if len(header) < 4:
        raise BinvoxError("incomplete header")
    magic = header[0].split()
    if magic[:2] != [b"#binvox", b"1"]:
        raise BinvoxError(f"unsupported binvox version {header[0]!r}")
    fields = {}
    for line in header[1:]:
        key = line.split()[0] if line.split() else b""
        fields[key] = line
    try:
        dims = [int(t) for t in _header_field(fields[b"dim"], b"dim")]
        translate = tuple(float(t) for t in _header_field(fields[b"translate"], b"translate"))
        scale = float(_header_field(fields[b"scale"], b"scale")[0])
    except KeyError as exc:
        raise BinvoxError(f"missing header line {exc.args[0].decode()!r}") from None
    if len(dims) != 3 or len(set(dims)) != 1:
        raise BinvoxError(f"non-cubic dim {dims}")
    d = dims[0]

    payload = np.frombuffer(data, dtype=np.uint8, offset=pos)
    if payload.size % 2:
        raise BinvoxError("RLE payload has an odd number of bytes")
    values, counts = payload[0::2], payload[1::2].astype(np.int64)
    total = int(counts.sum())
    if total != d**3:
        raise BinvoxError(f"RLE payload {total} ≠ {d**3}")
    flat = np.repeat(values != 0, counts)
    # stored as [x][z][y]
    grid = flat.reshape(d, d, d).transpose(0, 2, 1).astype(np.float64)
    return VoxelGrid(grid, translate, scale)


def rle_encode(flat: np.ndarray) -> bytes:
    """Byte-pair run-length encoding with runs capped at 255."""
    flat = np.asarray(flat, dtype=np.uint8)
    if flat.size == 0:
        return b""
    change = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [flat.size])))
    out = bytearray()
    for start, length in zip(starts, lengths):
        v = int(flat[start])
        full, rest = divmod(int(length), 255)
        out += bytes((v, 255)) * full
        if rest:
            out += bytes((v, rest))
    return bytes(out)


def write_binvox(grid: VoxelGrid) -> bytes:
    """Encode ``grid`` as binvox v1, thresholding occupancy at 0.5."""
    d = grid.n
    tx, ty, tz = grid.translate
    header = (
        "#binvox 1\n"
        f"dim {d} {d} {d}\n"
        f"translate {tx!r} {ty!r} {tz!r}\n"
        f"scale {grid.scale!r}\n"
        "data\n"
    ).encode("ascii")
    flat = grid.occupancy().transpose(0, 2, 1).ravel()
    return header + rle_encode(flat)
