"""Line-integral (Radon) transform as an exact pixel-intersection matrix.

Rows are indexed by (angle, offset) pairs; the entry for a pixel is the
exact length of the line's intersection with that pixel, computed by
breakpoint traversal (no interpolation kernel).  Masks select row subsets;
the limited-data variants share the full row construction.  The transform
identifies the line (phi, s) with (phi + pi, -s), and masks are required to
respect that symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..seqspace import unit_weights
from ..spectral import WeightedOperator


class RadonError(ValueError):
    """Invalid sampling geometry or mask."""


@dataclass(frozen=True)
class RadonConfig:
    """Pixel grid over [-1,1]^2 and the sampled (angle, offset) geometry.

    ``mask`` is a boolean (n_angles, n_offsets) array marking measured
    lines; it must be symmetric under (phi, s) -> (phi + pi, -s) whenever
    both members of a pair are sampled.
    """

    n_pix: int
    angles: np.ndarray
    offsets: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        if self.n_pix < 2:
            raise RadonError("n_pix must be >= 2")
        ang = np.asarray(self.angles, dtype=float)
        off = np.asarray(self.offsets, dtype=float)
        if ang.ndim != 1 or off.ndim != 1 or ang.size == 0 or off.size == 0:
            raise RadonError("angles and offsets must be nonempty 1-d arrays")
        if np.any(np.abs(off) > 1.0 + 1e-12):
            raise RadonError("offsets must lie in [-1, 1]")
        mask = (
            np.ones((ang.size, off.size), dtype=bool)
            if self.mask is None
            else np.asarray(self.mask, dtype=bool)
        )
        if mask.shape != (ang.size, off.size):
            raise RadonError(f"mask shape {mask.shape} != {(ang.size, off.size)}")
        if not mask.any():
            raise RadonError("empty mask")
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "offsets", off)
        object.__setattr__(self, "mask", mask)
        self._check_symmetry()

    def _check_symmetry(self):
        ang, off, mask = self.angles, self.offsets, self.mask
        two_pi = 2.0 * np.pi
        for i, phi in enumerate(ang):
            partner_phi = (phi + np.pi) % two_pi
            js = np.flatnonzero(np.abs(((ang - partner_phi + np.pi) % two_pi) - np.pi) < 1e-9)
            if js.size == 0:
                continue
            j = int(js[0])
            for a, s in enumerate(off):
                bs = np.flatnonzero(np.abs(off + s) < 1e-9)
                if bs.size == 0:
                    continue
                b = int(bs[0])
                if mask[i, a] != mask[j, b]:
                    raise RadonError(
                        "mask breaks the (phi, s) -> (phi+pi, -s) line symmetry "
                        f"at angle {phi:.4f}, offset {s:.4f}"
                    )


def uniform_radon_config(n_pix: int, n_angles: int, n_offsets: int) -> RadonConfig:
    """Full-data geometry: angles uniform on [0, 2pi), offsets uniform on [-1, 1]."""
    angles = np.arange(n_angles) * (2.0 * np.pi / n_angles)
    offsets = np.linspace(-1.0, 1.0, n_offsets)
    return RadonConfig(n_pix, angles, offsets)


def remove_angular_sector(cfg: RadonConfig, start: float, width: float) -> RadonConfig:
    """Mask out the lines with direction angle (mod pi) in [start, start+width).

    Removing a direction sector removes both parametrizations of each line,
    so the result keeps the required symmetry.
    """
    if not 0 < width < np.pi:
        raise RadonError("sector width must lie in (0, pi)")
    rel = (cfg.angles - start) % np.pi
    removed = rel < width - 1e-12
    mask = cfg.mask.copy()
    mask[removed, :] = False
    if not mask.any():
        raise RadonError("empty mask")
    return RadonConfig(cfg.n_pix, cfg.angles, cfg.offsets, mask)


def _line_row(n_pix: int, phi: float, s: float):
    """Pixel indices and exact intersection lengths for one line."""
    theta = np.array([np.cos(phi), np.sin(phi)])
    perp = np.array([-np.sin(phi), np.cos(phi)])
    t_lo, t_hi = -np.inf, np.inf
    for i in range(2):
        a, b = perp[i], s * theta[i]
        if abs(a) < 1e-15:
            if not -1.0 <= b <= 1.0:
                return np.empty(0, np.int64), np.empty(0)
        else:
            t1, t2 = (-1.0 - b) / a, (1.0 - b) / a
            t_lo = max(t_lo, min(t1, t2))
            t_hi = min(t_hi, max(t1, t2))
    if not t_lo < t_hi:
        return np.empty(0, np.int64), np.empty(0)
    h = 2.0 / n_pix
    cuts = [np.array([t_lo, t_hi])]
    for i in range(2):
        a, b = perp[i], s * theta[i]
        if abs(a) > 1e-15:
            tk = (np.arange(n_pix + 1) * h - 1.0 - b) / a
            cuts.append(tk[(tk > t_lo) & (tk < t_hi)])
    ts = np.unique(np.concatenate(cuts))
    mids = (ts[:-1] + ts[1:]) / 2.0
    lens = np.diff(ts)
    pts = s * theta[None, :] + mids[:, None] * perp[None, :]
    ix = np.floor((pts[:, 0] + 1.0) / h).astype(np.int64)
    iy = np.floor((pts[:, 1] + 1.0) / h).astype(np.int64)
    ok = (ix >= 0) & (ix < n_pix) & (iy >= 0) & (iy < n_pix) & (lens > 1e-14)
    return (iy[ok] * n_pix + ix[ok]), lens[ok]


@dataclass(frozen=True)
class RadonTransform:
    """Sparse row-major Radon matrix plus the row bookkeeping."""

    config: RadonConfig
    matrix: sp.csr_matrix
    rows: np.ndarray = field(repr=False)  # (angle_index, offset_index) per row

    def apply(self, image: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(image, dtype=float).ravel()

    def operator(self) -> WeightedOperator:
        return WeightedOperator(
            self.matrix.toarray(),
            unit_weights(self.config.n_pix**2),
            unit_weights(self.matrix.shape[0]),
            label=f"radon(n_pix={self.config.n_pix},rows={self.matrix.shape[0]})",
        )


def radon_system(cfg: RadonConfig) -> RadonTransform:
    """Assemble the masked sparse system row by row."""
    ai, oi = np.nonzero(cfg.mask)
    indptr = [0]
    indices, values = [], []
    for a, o in zip(ai, oi):
        cols, lens = _line_row(cfg.n_pix, cfg.angles[a], cfg.offsets[o])
        indices.append(cols)
        values.append(lens)
        indptr.append(indptr[-1] + cols.size)
    matrix = sp.csr_matrix(
        (np.concatenate(values), np.concatenate(indices), np.array(indptr)),
        shape=(ai.size, cfg.n_pix**2),
    )
    return RadonTransform(cfg, matrix, np.stack([ai, oi], axis=1))


def radon_matrix(cfg: RadonConfig) -> WeightedOperator:
    """Dense masked Radon matrix with unit weights (rows = measured lines)."""
    return radon_system(cfg).operator()


def gram_singular_values(matrix) -> np.ndarray:
    """All singular values via the dense eigendecomposition of A^T A.

    Suited to very tall sparse systems where a dense bidiagonalization of A
    itself would dominate the runtime; accuracy is limited to about
    sigma_1 * sqrt(machine eps), fine for leading-order comparisons.
    """
    if sp.issparse(matrix):
        gram = (matrix.T @ matrix).toarray()
    else:
        m = np.asarray(matrix)
        gram = m.T @ m
    w = np.linalg.eigvalsh(gram)
    return np.sqrt(np.maximum(w[::-1], 0.0))
