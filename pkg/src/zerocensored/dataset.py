"""Dataset containers: validated compositions and their transformed, rotation-annotated form."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import rotated_face_point
from .simplex import (
    RECLOSE_TOL,
    UNIT_SUM_TOL,
    ZERO_TOL,
    MultipleZerosError,
    alpha_transform,
)


def _format_rows(rows) -> str:
    shown = ", ".join(str(r) for r in rows[:10])
    return shown + (", ..." if len(rows) > 10 else "")


@dataclass(frozen=True)
class CompositionalDataset:
    """An ordered collection of compositions, each interior or with a single zero part.

    ``zero_index[i]`` is the zero component of row i, or -1 for interior rows.
    Build instances with ``from_array`` so every row is validated.
    """

    parts: np.ndarray
    zero_index: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        parts = np.asarray(self.parts, dtype=float)
        zero_index = np.asarray(self.zero_index, dtype=int)
        if parts.ndim != 2 or parts.shape[1] < 2:
            raise ValueError(f"parts must be (n, D) with D >= 2, got shape {parts.shape}")
        if zero_index.shape != (parts.shape[0],):
            raise ValueError("zero_index must have one entry per row")
        if self.names is not None and len(self.names) != parts.shape[1]:
            raise ValueError("names must have one entry per component")
        parts.setflags(write=False)
        zero_index.setflags(write=False)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "zero_index", zero_index)

    @classmethod
    def from_array(cls, rows, names=None) -> "CompositionalDataset":
        """Validate an (n, D) array of compositions row by row.

        Row numbers in error messages are 1-based data rows.  Rows whose sum
        is off by at most ``RECLOSE_TOL`` are re-closed with a single warning;
        rows with more than one zero raise ``MultipleZerosError`` listing them.
        """
        x = np.array(rows, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] < 2:
            raise ValueError(f"expected an (n, D) array with D >= 2, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            bad = np.flatnonzero(~np.isfinite(x).all(axis=1)) + 1
            raise ValueError(f"non-finite values in rows {_format_rows(bad)}")
        negative = np.flatnonzero((x < -ZERO_TOL).any(axis=1)) + 1
        if negative.size:
            raise ValueError(f"negative parts in rows {_format_rows(negative)}")
        x[x < 0.0] = 0.0
        sums = x.sum(axis=1)
        broken = np.flatnonzero(np.abs(sums - 1.0) > RECLOSE_TOL) + 1
        if broken.size:
            raise ValueError(f"rows not summing to 1 (beyond {RECLOSE_TOL:g}): {_format_rows(broken)}")
        reclose = np.abs(sums - 1.0) > UNIT_SUM_TOL
        if reclose.any():
            warnings.warn(f"re-closed {int(reclose.sum())} row(s) with unit-sum noise above {UNIT_SUM_TOL:g}", stacklevel=2)
            x[reclose] /= sums[reclose, None]
        zero_mask = x <= ZERO_TOL
        counts = zero_mask.sum(axis=1)
        multi = np.flatnonzero(counts > 1) + 1
        if multi.size:
            raise MultipleZerosError(
                f"rows with more than one zero part: {_format_rows(multi)}", rows=multi
            )
        zero_index = np.where(counts == 1, zero_mask.argmax(axis=1), -1)
        return cls(parts=x, zero_index=zero_index, names=tuple(names) if names is not None else None)

    @property
    def n_obs(self) -> int:
        return int(self.parts.shape[0])

    @property
    def n_parts(self) -> int:
        return int(self.parts.shape[1])

    @property
    def interior_mask(self) -> np.ndarray:
        return self.zero_index < 0

    @property
    def interior_parts(self) -> np.ndarray:
        return self.parts[self.interior_mask]

    @property
    def face_parts(self) -> np.ndarray:
        return self.parts[~self.interior_mask]

    @property
    def face_zero_index(self) -> np.ndarray:
        return self.zero_index[~self.interior_mask]

    @property
    def n_interior(self) -> int:
        return int(self.interior_mask.sum())

    @property
    def n_face(self) -> int:
        return self.n_obs - self.n_interior

    def observed_zero_counts(self) -> np.ndarray:
        """Number of observed zeros in each component."""
        counts = np.zeros(self.n_parts, dtype=int)
        idx, reps = np.unique(self.face_zero_index, return_counts=True)
        counts[idx] = reps
        return counts


@dataclass(frozen=True)
class TransformedSample:
    """A dataset mapped to R^d, with rotation data cached for every face point.

    ``rotations[i]`` and ``radii[i]`` are the Gram-Schmidt matrix B_i and the
    norm c1_i of face vector i; they depend only on the data, never on the
    model parameters, so they are computed once here.
    """

    interior: np.ndarray
    face: np.ndarray
    face_zero_index: np.ndarray
    rotations: np.ndarray
    radii: np.ndarray
    alpha: float
    n_parts: int
    names: tuple[str, ...] | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.n_parts - 1

    @property
    def n_interior(self) -> int:
        return int(self.interior.shape[0])

    @property
    def n_face(self) -> int:
        return int(self.face.shape[0])

    @property
    def n_obs(self) -> int:
        return self.n_interior + self.n_face


def transform_dataset(dataset: CompositionalDataset, alpha: float = 1.0) -> TransformedSample:
    """Map a dataset into R^(D-1) and attach per-face-point rotation data."""
    d = dataset.n_parts - 1
    interior = (
        alpha_transform(dataset.interior_parts, alpha)
        if dataset.n_interior
        else np.empty((0, d))
    )
    n_face = dataset.n_face
    face = alpha_transform(dataset.face_parts, alpha) if n_face else np.empty((0, d))
    rotations = np.empty((n_face, d, d))
    radii = np.empty(n_face)
    for i in range(n_face):
        rotations[i], radii[i] = rotated_face_point(face[i])
    return TransformedSample(
        interior=interior,
        face=face,
        face_zero_index=dataset.face_zero_index.copy(),
        rotations=rotations,
        radii=radii,
        alpha=float(alpha),
        n_parts=dataset.n_parts,
        names=dataset.names,
    )
