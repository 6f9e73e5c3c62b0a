"""Batch featurization and dataset export (CSV / ARFF)."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .basis import HahnParams
from .encoding import deinterleave, from_decimal, interleave
from .moments import COMPLEX_FAMILIES, FAMILIES, FEATURE_ORDER, compute_moments, feature_names, feature_vector
from .stats import LabeledDataset
from .voxel import DEFAULT_GRID, DEFAULT_MARGIN, VoxelGrid, parse_xyz, read_binvox, voxelize

log = logging.getLogger(__name__)

DEFAULT_CLASSES = ("ATS", "nonATS")


class PipelineError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    families: tuple[str, ...] = FAMILIES
    max_order: int = FEATURE_ORDER
    grid: int = DEFAULT_GRID
    mu: float = 0.0
    nu: float = 0.0
    mode: str = "sphere"
    margin: float = DEFAULT_MARGIN
    geometric_variant: str = "zero_order"
    raw_real: bool = False
    jobs: int = 1
    repeats: int = 50

    def __post_init__(self):
        unknown = set(self.families) - set(FAMILIES)
        if unknown:
            raise PipelineError(f"unknown families: {sorted(unknown)}")
        if self.max_order < 0:
            raise PipelineError("max_order must be >= 0")
        if self.grid < 2:
            raise PipelineError("grid size must be >= 2")
        if "hahn" in self.families and self.max_order > self.grid - 1:
            raise PipelineError(f"Hahn order {self.max_order} needs a grid of at least {self.max_order + 1}")
        if self.repeats < 1:
            raise PipelineError("repeats must be >= 1")
        HahnParams(self.mu, self.nu, self.grid)

    def with_grid(self, n: int) -> "RunConfig":
        return replace(self, grid=n)


def load_grid(path: Path, config: RunConfig) -> VoxelGrid:
    """Read a binvox file or voxelize an XYZ file according to ``config``."""
    path = Path(path)
    data = path.read_bytes()
    if data.startswith(b"#binvox"):
        return read_binvox(data)
    mol = parse_xyz(data.decode("utf-8"), name=path.stem)
    return voxelize(mol, config.grid, config.mode, margin=config.margin)


def column_names(config: RunConfig) -> list[str]:
    names = []
    for fam in config.families:
        names.extend(feature_names(fam, config.max_order))
    return names


def _format_value(value, family: str, raw_real: bool) -> str:
    if raw_real and family not in COMPLEX_FAMILIES:
        return repr(float(np.real(value)))
    return str(interleave(complex(value)))


def featurize_grid(grid: VoxelGrid, config: RunConfig) -> list[str]:
    """One exported row (feature cells only) for ``grid``."""
    params = HahnParams(config.mu, config.nu, grid.n)
    cells: list[str] = []
    for fam in config.families:
        ms = compute_moments(fam, grid, config.max_order, params, config.geometric_variant)
        fv = feature_vector(ms, config.max_order)
        cells.extend(_format_value(v, fam, config.raw_real) for v in fv.values.tolist())
    return cells


def _featurize_path(args) -> tuple[str, list[str] | None, str | None]:
    path, config = args
    try:
        grid = load_grid(path, config)
        if "hahn" in config.families and grid.n - 1 < config.max_order:
            raise PipelineError(f"grid n={grid.n} too small for Hahn order {config.max_order}")
        return Path(path).stem, featurize_grid(grid, config), None
    except (ValueError, OSError, KeyError) as exc:
        return Path(path).stem, None, str(exc)


def featurize_paths(paths: Sequence[Path], config: RunConfig) -> list[tuple[str, list[str] | None, str | None]]:
    """Featurize every path; output order follows input order."""
    work = [(Path(p), config) for p in paths]
    if config.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_featurize_path, work))
    return [_featurize_path(w) for w in work]


def read_labels(text: str) -> dict[str, str]:
    labels = {}
    reader = csv.reader(io.StringIO(text))
    for i, row in enumerate(reader):
        if not row or row[0].startswith("#"):
            continue
        if i == 0 and [c.strip().lower() for c in row[:2]] == ["id", "class"]:
            continue
        if len(row) < 2:
            raise PipelineError(f"labels line {i + 1}: expected 'id,class'")
        labels[row[0].strip()] = row[1].strip()
    return labels


@dataclass
class FeatureTable:
    names: list[str]
    ids: list[str] = field(default_factory=list)
    rows: list[list[str]] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    def add(self, mol_id: str, cells: list[str], label: str):
        if len(cells) != len(self.names):
            raise PipelineError(f"{mol_id}: {len(cells)} cells for {len(self.names)} columns")
        self.ids.append(mol_id)
        self.rows.append(cells)
        self.labels.append(label)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["id", *self.names, "class"])
        for mol_id, cells, label in zip(self.ids, self.rows, self.labels):
            w.writerow([mol_id, *cells, label])
        return buf.getvalue()

    def to_arff(self, relation: str = "moments3d") -> str:
        classes = list(DEFAULT_CLASSES) + sorted(set(self.labels) - set(DEFAULT_CLASSES))
        out = [f"@relation {relation}", "", "@attribute id string"]
        out.extend(f"@attribute '{name}' numeric" for name in self.names)
        out.append("@attribute class {" + ",".join(classes) + "}")
        out.extend(["", "@data"])
        for mol_id, cells, label in zip(self.ids, self.rows, self.labels):
            out.append(",".join([_arff_quote(mol_id), *cells, label]))
        return "\n".join(out) + "\n"


def _arff_quote(text: str) -> str:
    if text and all(c.isalnum() or c in "_-." for c in text):
        return text
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"


def read_feature_csv(text: str) -> FeatureTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "id" or header[-1] != "class":
        raise PipelineError("dataset CSV must have 'id' first and 'class' last")
    table = FeatureTable(header[1:-1])
    for row in reader:
        if not row:
            continue
        table.add(row[0], row[1:-1], row[-1])
    return table


def _family_of(name: str) -> str:
    return name.split("_", 1)[0]


def _cell_value(cell: str) -> complex:
    """Encoded cells are bare digit strings; raw reals always carry '.', 'e', '-' or letters."""
    if cell.isdigit():
        return deinterleave(from_decimal(cell))
    return complex(float(cell), 0.0)


def to_labeled_dataset(table: FeatureTable) -> LabeledDataset:
    """Statistics view of an exported table.

    Real families contribute their decoded value; complex families contribute
    the magnitudes of both lanes as two separate statistic columns.
    """
    columns, names = [], []
    decoded = [[_cell_value(c) for c in row] for row in table.rows]
    for j, name in enumerate(table.names):
        col = np.array([row[j] for row in decoded], dtype=np.complex128)
        if _family_of(name) in COMPLEX_FAMILIES:
            columns.extend([np.abs(col.real), np.abs(col.imag)])
            names.extend([f"{name}|re|", f"{name}|im|"])
        else:
            columns.append(col.real)
            names.append(name)
    features = np.column_stack(columns) if columns else np.zeros((len(table.rows), 0))
    return LabeledDataset(features, list(table.labels), list(table.ids), names)


def build_table(paths: Iterable[Path], labels: dict[str, str], config: RunConfig) -> tuple[FeatureTable, list[str]]:
    """Featurize labelled inputs; returns the table and per-file error messages."""
    paths = [Path(p) for p in paths]
    errors = []
    missing = [p.stem for p in paths if p.stem not in labels]
    if missing:
        raise PipelineError(f"unlabeled molecules: {', '.join(missing)}")
    table = FeatureTable(column_names(config))
    for mol_id, cells, err in featurize_paths(paths, config):
        if err is not None:
            errors.append(f"{mol_id}: {err}")
            log.error("%s: %s", mol_id, err)
            continue
        table.add(mol_id, cells, labels[mol_id])
    return table, errors
