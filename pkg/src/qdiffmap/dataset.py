"""Synthetic manifolds, CSV ingestion and bandwidth pre-scaling."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import IngestionError, ParameterError


@dataclass
class DataSet:
    """N points in d dimensions.

    ``theta`` is an optional per-point real side channel (the helix
    parameter for generated data) used by downstream geometry checks.
    """

    points: np.ndarray
    labels: list | None = None
    name: str = "data"
    theta: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ParameterError(f"points must be a 2-D array, got shape {pts.shape}")
        if pts.shape[0] < 2 or pts.shape[1] < 1:
            raise ParameterError(f"need N >= 2 and d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("points contain non-finite entries")
        if self.labels is not None and len(self.labels) != pts.shape[0]:
            raise ParameterError("labels length does not match number of points")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def gen_toroidal_helix(
    n: int,
    major_radius: float = 2.0,
    minor_radius: float = 0.5,
    windings: int = 10,
    seed: int = 0,
    jitter: float = 0.0,
) -> DataSet:
    """Points on a helix wound around a torus.

    Angles form a uniform grid on [0, 2*pi). ``seed`` only matters when
    ``jitter`` > 0, in which case each angle is perturbed by a uniform
    offset of at most ``jitter`` grid steps.
    """
    if n < 4:
        raise ParameterError(f"n must be >= 4, got {n}")
    if major_radius <= 0 or minor_radius < 0:
        raise ParameterError("radii must be positive")
    if windings < 1:
        raise ParameterError(f"windings must be >= 1, got {windings}")
    theta = 2 * np.pi * np.arange(n) / n
    if jitter > 0:
        rng = np.random.default_rng(seed)
        theta = theta + rng.uniform(-jitter, jitter, size=n) * (2 * np.pi / n)
    ring = major_radius + minor_radius * np.cos(windings * theta)
    pts = np.column_stack(
        [ring * np.cos(theta), ring * np.sin(theta), minor_radius * np.sin(windings * theta)]
    )
    return DataSet(pts, name=f"helix_n{n}", theta=theta)


def gen_blobs(centers, per_center, spread=0.5, seed: int = 0, name="blobs") -> DataSet:
    """Isotropic Gaussian clusters.

    ``per_center`` and ``spread`` are each a scalar or one value per center.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if np.isscalar(per_center):
        per_center = [int(per_center)] * len(centers)
    if len(per_center) != len(centers):
        raise ParameterError("per_center must match the number of centers")
    spread = np.broadcast_to(np.asarray(spread, dtype=float), (len(centers),))
    if np.any(spread < 0):
        raise ParameterError("spread must be nonnegative")
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    for k, (c, cnt, sd) in enumerate(zip(centers, per_center, spread)):
        pts.append(c + sd * rng.standard_normal((cnt, centers.shape[1])))
        labels += [k] * cnt
    return DataSet(np.vstack(pts), labels=labels, name=name)


def gen_two_clusters(
    sizes=(2, 6),
    separation: float = 2.0,
    spreads=(0.2, 0.6),
    seed: int = 2,
) -> DataSet:
    """A tight and a loose planar cluster.

    The defaults give an N=8 set whose degrees differ enough between the
    clusters that the leading non-trivial eigenvectors overlap the uniform
    state, and whose top eigenvalues (1, 0.756, 0.239, 0.101) are well
    separated.
    """
    centers = [[0.0, 0.0], [separation, 0.0]]
    X = gen_blobs(centers, list(sizes), spread=list(spreads), seed=seed)
    X.name = f"two_clusters_n{X.n}"
    return X


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _resolve_column(col, header, width):
    if isinstance(col, int):
        if not 0 <= col < width:
            raise IngestionError(f"column index {col} out of range", column=col)
        return col
    if header is None:
        if isinstance(col, str) and col.isdigit():
            return _resolve_column(int(col), header, width)
        raise IngestionError("named column requested but file has no header", column=col)
    if col not in header:
        raise IngestionError("unknown column", column=col)
    return header.index(col)


def load_csv(
    path,
    feature_columns: Sequence[str | int] | None = None,
    label_column: str | int | None = None,
    standardize: bool = False,
) -> DataSet:
    """Read a comma-separated table.

    A header is assumed when any cell of the first row fails to parse as a
    float. ``feature_columns=None`` selects every column except the label.
    ``standardize`` z-scores each feature column; off by default.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise IngestionError(f"empty file: {path}")

    header = None
    if not all(_is_number(c.strip()) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    width = len(header) if header is not None else len(rows[0])

    label_idx = None if label_column is None else _resolve_column(label_column, header, width)
    if feature_columns is None:
        feat_idx = [j for j in range(width) if j != label_idx]
    else:
        feat_idx = [_resolve_column(c, header, width) for c in feature_columns]

    first_line = 2 if header is not None else 1
    values, labels = [], []
    for r, row in enumerate(rows):
        lineno = first_line + r
        if len(row) != width:
            raise IngestionError(f"ragged row: expected {width} cells, got {len(row)}", row=lineno)
        vec = []
        for j in feat_idx:
            cell = row[j].strip()
            try:
                vec.append(float(cell))
            except ValueError:
                name = header[j] if header is not None else j
                raise IngestionError(f"non-numeric cell {cell!r}", row=lineno, column=name) from None
        values.append(vec)
        if label_idx is not None:
            labels.append(row[label_idx].strip())

    pts = np.array(values, dtype=float)
    if standardize:
        std = pts.std(axis=0)
        std[std == 0] = 1.0
        pts = (pts - pts.mean(axis=0)) / std
    return DataSet(pts, labels=labels if label_idx is not None else None, name=path.stem)


def scale_by_bandwidth(X: DataSet, sigma: float) -> DataSet:
    """Fold the kernel bandwidth into the coordinates.

    Dividing by sqrt(sigma) makes the unit-bandwidth Gaussian kernel of the
    output equal the sigma-bandwidth kernel of the input.
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    return DataSet(X.points / np.sqrt(sigma), labels=X.labels, name=X.name, theta=X.theta)
