"""Exact uniform sampling in l1 / l2 / linf balls.

Sample i is a pure function of (stream, i): the l1 sampler uses sorted
uniform spacings with random signs, the l2 sampler uses Gaussian directions
with the chi-square-CDF radius law, and the linf sampler draws per-coordinate
uniforms.  All randomness comes from the counter-based stream in prng.py, so
any partition of an index range across workers reproduces the serial output
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import prng
from .special import inv_norm_cdf_array, reg_lower_incomplete_gamma_array

L1 = "1"
L2 = "2"
LINF = "inf"
NORMS = (L1, L2, LINF)

# radial law options for the l2 sampler
RADIAL_GAMMA = "gamma"      # kappa = P(n/2, s/2)^(1/n), s = |y'|^2
RADIAL_UNIFORM = "uniform"  # kappa = U^(1/n) with an independent uniform


@dataclass(frozen=True)
class BallSpec:
    """Perturbation region B_p(center, radius)."""
    center: np.ndarray
    radius: float
    norm: str

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64).ravel()
        if not np.isfinite(center).all():
            raise ValueError("ball center must be finite")
        object.__setattr__(self, "center", center)
        if self.radius < 0:
            raise ValueError(f"radius must be non-negative, got {self.radius}")
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}, got {self.norm!r}")

    @property
    def dim(self) -> int:
        return self.center.size


@dataclass(frozen=True)
class SampleStream:
    """Value object naming a deterministic sample sequence.

    radial selects the l2 radius law; the incomplete-gamma form is the
    default, the textbook uniform form exists for cross-checks.
    """
    seed: int
    radial: str = RADIAL_GAMMA

    def __post_init__(self):
        if self.radial not in (RADIAL_GAMMA, RADIAL_UNIFORM):
            raise ValueError(f"unknown radial mode {self.radial!r}")


def _l1_batch(spec: BallSpec, stream: SampleStream, indices: np.ndarray) -> np.ndarray:
    n = spec.dim
    u = prng.uniforms(stream.seed, indices, 2 * n)
    points = np.sort(u[:, :n] * spec.radius, axis=1)
    spacings = np.diff(points, axis=1, prepend=0.0)
    signs = np.where(u[:, n:] < 0.5, -1.0, 1.0)
    return spec.center + signs * spacings


def _l2_batch(spec: BallSpec, stream: SampleStream, indices: np.ndarray) -> np.ndarray:
    n = spec.dim
    extra = 1 if stream.radial == RADIAL_UNIFORM else 0
    u = prng.uniforms(stream.seed, indices, n + extra)
    y = inv_norm_cdf_array(u[:, :n])
    s = np.einsum("ij,ij->i", y, y)
    zero = s == 0.0  # cannot occur with open-interval uniforms; guard anyway
    if zero.any():
        u2 = prng.uniforms(stream.seed, indices[zero], n + extra,
                           substream=prng.SUBSTREAM_REDRAW)
        u[zero] = u2
        y[zero] = inv_norm_cdf_array(u2[:, :n])
        s[zero] = np.einsum("ij,ij->i", y[zero], y[zero])
    if stream.radial == RADIAL_UNIFORM:
        kappa = u[:, n] ** (1.0 / n)
    else:
        kappa = reg_lower_incomplete_gamma_array(n / 2.0, s / 2.0) ** (1.0 / n)
    return spec.center + (spec.radius * kappa / np.sqrt(s))[:, None] * y


def _linf_batch(spec: BallSpec, stream: SampleStream, indices: np.ndarray) -> np.ndarray:
    u = prng.uniforms(stream.seed, indices, spec.dim)
    return spec.center + (2.0 * u - 1.0) * spec.radius


_BATCHERS = {L1: _l1_batch, L2: _l2_batch, LINF: _linf_batch}


def sample_batch(spec: BallSpec, stream: SampleStream, start: int, count: int,
                 clamp: tuple[float, float] | None = None) -> np.ndarray:
    """Samples at indices start .. start+count-1, shape (count, n).

    Clamping clips coordinates into [lo, hi] after sampling; it changes the
    sampled measure and is off by default.
    """
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    try:
        batcher = _BATCHERS[spec.norm]
    except KeyError:
        raise ValueError(f"unsupported norm {spec.norm!r}") from None
    indices = np.arange(start, start + count, dtype=np.uint64)
    if spec.radius == 0.0:
        out = np.tile(spec.center, (count, 1))
    else:
        out = batcher(spec, stream, indices)
    if clamp is not None:
        lo, hi = clamp
        np.clip(out, lo, hi, out=out)
    return out


def _sample_one(norm: str, spec: BallSpec, stream: SampleStream, i: int) -> np.ndarray:
    if spec.norm != norm:
        raise ValueError(f"spec norm is {spec.norm!r}, expected {norm!r}")
    return sample_batch(spec, stream, i, 1)[0]


def sample_l1(spec: BallSpec, stream: SampleStream, i: int) -> np.ndarray:
    return _sample_one(L1, spec, stream, i)


def sample_l2(spec: BallSpec, stream: SampleStream, i: int) -> np.ndarray:
    return _sample_one(L2, spec, stream, i)


def sample_linf(spec: BallSpec, stream: SampleStream, i: int) -> np.ndarray:
    return _sample_one(LINF, spec, stream, i)


def ball_norm(spec: BallSpec, points: np.ndarray) -> np.ndarray:
    """p-norm of each row's offset from the ball center."""
    delta = points - spec.center
    if spec.norm == L1:
        return np.abs(delta).sum(axis=1)
    if spec.norm == L2:
        return np.sqrt(np.einsum("ij,ij->i", delta, delta))
    return np.abs(delta).max(axis=1)
