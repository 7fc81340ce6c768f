"""Planar point-process samplers: Poisson and beta-Ginibre deployments.

Both samplers are pure functions of (parameters, seed). The Ginibre sampler
uses the eigenvalue construction: eigenvalues of a K x K matrix with i.i.d.
standard complex Gaussian entries, rescaled to the target intensity, fill a
disk; the disk is taken large enough to cover the observation window with a
guard margin, beta-thinned, and cropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

# Guard disk radius = window circumradius * (1 + GUARD_MARGIN); limits edge
# bias of the eigenvalue construction inside the cropped window.
GUARD_MARGIN = 0.2


def _rng_from(seed) -> np.random.Generator:
    """Build a Generator from an int seed, a SeedSequence, or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed))


@dataclass(frozen=True)
class Window:
    """Axis-aligned simulation square centered at the origin."""

    side_length: float = 1.0

    def __post_init__(self):
        if not self.side_length > 0:
            raise InvalidParameterError(f"window side_length must be > 0, got {self.side_length}")

    @property
    def area(self) -> float:
        return self.side_length**2

    @property
    def circumradius(self) -> float:
        return self.side_length * np.sqrt(2.0) / 2.0

    def contains(self, points: np.ndarray) -> np.ndarray:
        half = self.side_length / 2.0
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return (np.abs(pts[:, 0]) <= half) & (np.abs(pts[:, 1]) <= half)


@dataclass(frozen=True)
class PointPattern:
    """A finite planar pattern together with its generating window."""

    points: np.ndarray
    window: Window
    intensity_requested: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if not self.intensity_requested > 0:
            raise InvalidParameterError(
                f"intensity_requested must be > 0, got {self.intensity_requested}"
            )
        if len(pts) and not self.window.contains(pts).all():
            raise InvalidParameterError("all points must lie inside the window")

    def __len__(self) -> int:
        return len(self.points)


def sample_poisson(intensity: float, window: Window, seed) -> PointPattern:
    """Sample a homogeneous Poisson pattern on the window.

    The count is Poisson(intensity * area) and positions are i.i.d. uniform;
    restriction of a Poisson process to a window is exact, so no guard region
    is needed.
    """
    if not intensity > 0:
        raise InvalidParameterError(f"intensity must be > 0, got {intensity}")
    rng = _rng_from(seed)
    count = rng.poisson(intensity * window.area)
    half = window.side_length / 2.0
    pts = rng.uniform(-half, half, size=(count, 2))
    return PointPattern(points=pts, window=window, intensity_requested=intensity)


def sample_beta_ginibre(beta: float, intensity: float, window: Window, seed) -> PointPattern:
    """Sample a beta-Ginibre pattern of the given intensity on the window.

    A parent Ginibre process of intensity ``intensity / beta`` is realized on a
    guard disk covering the window, by taking the eigenvalues of a K x K
    complex Gaussian matrix (entries CN(0,1)) scaled by 1/sqrt(pi * parent
    intensity), with K chosen so the eigenvalue support covers the guard disk.
    Each point is then kept independently with probability ``beta`` (which
    preserves the target intensity) and the result is cropped to the window.
    """
    if not 0 < beta <= 1:
        raise InvalidParameterError(f"beta must be in (0, 1], got {beta}")
    if not intensity > 0:
        raise InvalidParameterError(f"intensity must be > 0, got {intensity}")
    rng = _rng_from(seed)

    parent_intensity = intensity / beta
    guard_radius = window.circumradius * (1.0 + GUARD_MARGIN)
    k = int(round(parent_intensity * np.pi * guard_radius**2))
    k = max(k, 1)

    a = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2.0)
    eig = np.linalg.eigvals(a) / np.sqrt(np.pi * parent_intensity)

    keep = rng.random(k) < beta
    eig = eig[keep]

    pts = np.column_stack([eig.real, eig.imag])
    pts = pts[window.contains(pts)]
    return PointPattern(points=pts, window=window, intensity_requested=intensity)
