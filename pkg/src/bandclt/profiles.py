"""Variance profiles, their periodizations, and Fourier data.

A profile is a nonnegative weight function w supported on [-1/2, 1/2],
normalized to unit integral, continuous at 0.  The periodized variant
w_nu copies w with period 1/nu; nu = 0 denotes the non-periodized
function on the whole line.  Everything downstream (matrix sampling,
limiting variances, covariance kernels) is driven by the Fourier
coefficients of w_nu and the Fourier transform of w_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "VarianceProfile",
    "PeriodizedProfile",
    "evaluate",
    "fourier_coeff",
    "fourier_coeff_many",
    "fourier_transform",
    "fejer_coefficient_sum",
    "self_convolution_at_zero",
    "self_convolution_sequence",
    "total_jump_variation",
    "conv_grid_aligned",
    "profile_from_config",
]

_NORM_TOL = 1e-12
_SUPPORT = 0.5


class ProfileError(ValueError):
    """Invalid profile construction or domain violation."""


@dataclass(frozen=True)
class VarianceProfile:
    """Weight function w on [-1/2, 1/2] with unit integral.

    kind is one of "uniform", "piecewise", "tabulated".  For piecewise
    profiles, ``breaks`` has m+1 sorted entries and ``values`` the m
    constant values in between.  Tabulated profiles carry samples on a
    uniform grid over [-1/2, 1/2] and are evaluated by linear
    interpolation.
    """

    kind: str
    breaks: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    grid: tuple[float, ...] = ()
    normalization: float = field(default=1.0, compare=False)
    sup_w: float = field(default=1.0, compare=False)

    @classmethod
    def uniform(cls) -> "VarianceProfile":
        return cls(kind="uniform", breaks=(-_SUPPORT, _SUPPORT), values=(1.0,))

    @classmethod
    def piecewise(cls, breaks, values) -> "VarianceProfile":
        breaks = tuple(float(b) for b in breaks)
        values = tuple(float(v) for v in values)
        if len(breaks) != len(values) + 1:
            raise ProfileError("need len(breaks) == len(values) + 1")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ProfileError("breaks must be strictly increasing")
        if breaks[0] < -_SUPPORT - _NORM_TOL or breaks[-1] > _SUPPORT + _NORM_TOL:
            raise ProfileError("support must lie inside [-1/2, 1/2]")
        if any(v < 0 for v in values):
            raise ProfileError("profile values must be nonnegative")
        total = sum(v * (b2 - b1) for v, b1, b2 in zip(values, breaks, breaks[1:]))
        if abs(total - 1.0) > _NORM_TOL:
            raise ProfileError(f"profile must integrate to 1, got {total!r}")
        return cls(kind="piecewise", breaks=breaks, values=values,
                   normalization=total, sup_w=max(values))

    @classmethod
    def tabulated(cls, grid) -> "VarianceProfile":
        grid = tuple(float(g) for g in grid)
        if len(grid) < 3:
            raise ProfileError("tabulated profile needs at least 3 samples")
        if any(g < 0 for g in grid):
            raise ProfileError("profile values must be nonnegative")
        g = np.asarray(grid)
        total = float(np.trapezoid(g, dx=1.0 / (len(grid) - 1)))
        if abs(total - 1.0) > _NORM_TOL:
            raise ProfileError(f"profile must integrate to 1, got {total!r}")
        return cls(kind="tabulated", breaks=(-_SUPPORT, _SUPPORT), grid=grid,
                   normalization=total, sup_w=float(g.max()))

    def __call__(self, x):
        """Evaluate w pointwise; accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            out = np.where(np.abs(x) <= _SUPPORT, 1.0, 0.0)
        elif self.kind == "piecewise":
            out = np.zeros_like(x)
            for v, b1, b2 in zip(self.values, self.breaks, self.breaks[1:]):
                out = np.where((x >= b1) & (x < b2), v, out)
            # closed right endpoint of the support
            out = np.where(x == self.breaks[-1], self.values[-1], out)
        else:
            g = np.asarray(self.grid)
            out = np.interp(x, np.linspace(-_SUPPORT, _SUPPORT, len(g)), g,
                            left=0.0, right=0.0)
            out = np.where(np.abs(x) > _SUPPORT, 0.0, out)
        return out if out.ndim else float(out)

    @property
    def piece_edges(self) -> tuple[float, ...]:
        if self.kind == "piecewise":
            return self.breaks
        return (-_SUPPORT, _SUPPORT)

    @property
    def min_piece_width(self) -> float:
        edges = self.piece_edges
        if self.kind == "tabulated":
            return 1.0 / (len(self.grid) - 1)
        return min(b2 - b1 for b1, b2 in zip(edges, edges[1:]))


@dataclass(frozen=True)
class PeriodizedProfile:
    """w_nu for nu in (0, 1], or the non-periodized w_0 when nu = 0."""

    base: VarianceProfile
    nu: float

    def __post_init__(self):
        if not 0.0 <= self.nu <= 1.0:
            raise ProfileError(f"nu must be in [0, 1], got {self.nu}")
        if 0.0 < self.nu < 1e-12:
            raise ProfileError("nu indistinguishable from 0; pass exactly 0")

    @property
    def period(self) -> float:
        if self.nu == 0.0:
            raise ProfileError("non-periodized profile has no period")
        return 1.0 / self.nu


def evaluate(p: PeriodizedProfile, x):
    """w_nu(x), reducing x into the fundamental domain when nu > 0."""
    x = np.asarray(x, dtype=float)
    if p.nu > 0.0:
        period = p.period
        x = x - period * np.round(x / period)
    out = p.base(x)
    return out


def _segment_transform(base: VarianceProfile, omega: float) -> complex:
    """integral of w(x) exp(i*omega*x) over the support, exact per piece."""
    if base.kind == "uniform":
        if omega == 0.0:
            return 1.0 + 0.0j
        half = omega * _SUPPORT
        return complex(math.sin(half) / half)
    if base.kind == "piecewise":
        if omega == 0.0:
            return complex(base.normalization)
        acc = 0.0 + 0.0j
        iw = 1j * omega
        for v, b1, b2 in zip(base.values, base.breaks, base.breaks[1:]):
            acc += v * (np.exp(iw * b2) - np.exp(iw * b1)) / iw
        return complex(acc)
    # tabulated: exact transform of the piecewise-linear interpolant
    return complex(_tabulated_transform(base, np.array([omega]))[0])


def _tabulated_transform(base: VarianceProfile, omega: np.ndarray) -> np.ndarray:
    """integral of the piecewise-linear interpolant times e^{i omega x},
    exact per segment, vectorized over omega."""
    g = np.asarray(base.grid)
    xs = np.linspace(-_SUPPORT, _SUPPORT, len(g))
    xa, xb = xs[:-1], xs[1:]
    ga, gb = g[:-1], g[1:]
    q = (gb - ga) / (xb - xa)
    omega = np.asarray(omega, dtype=float)
    out = np.empty(omega.shape, dtype=np.complex128)
    small = np.abs(omega) < 1e-8
    out[small] = base.normalization
    wflat = omega[~small]
    res = np.empty(wflat.shape, dtype=np.complex128)
    for s in range(0, len(wflat), 16384):  # bound the (omega, segment) temporaries
        w = wflat[s:s + 16384][:, None]
        ea = np.exp(1j * w * xa)
        eb = np.exp(1j * w * xb)
        seg = (gb * eb - ga * ea) / (1j * w) + q * (eb - ea) / w**2
        res[s:s + 16384] = seg.sum(axis=1)
    out[~small] = res
    return out


def fourier_coeff(p: PeriodizedProfile, k: int):
    """k-th Fourier coefficient of w_nu: integral of w(x) e^{2 pi i k x nu}."""
    if p.nu == 0.0:
        raise ProfileError("fourier_coeff requires nu > 0; use fourier_transform")
    omega = 2.0 * math.pi * k * p.nu
    return _segment_transform(p.base, omega)


def fourier_coeff_many(p: PeriodizedProfile, ks: np.ndarray) -> np.ndarray:
    """Vectorized fourier_coeff over an integer array (nu > 0)."""
    if p.nu == 0.0:
        raise ProfileError("fourier_coeff requires nu > 0; use fourier_transform")
    omega = 2.0 * np.pi * np.asarray(ks, dtype=float) * p.nu
    base = p.base
    if base.kind == "uniform":
        half = omega * _SUPPORT
        return np.asarray(np.sinc(half / np.pi), dtype=np.complex128)
    if base.kind == "piecewise":
        out = np.zeros(omega.shape, dtype=np.complex128)
        nonzero = omega != 0.0
        iw = 1j * omega[nonzero]
        for v, b1, b2 in zip(base.values, base.breaks, base.breaks[1:]):
            out[nonzero] += v * (np.exp(iw * b2) - np.exp(iw * b1)) / iw
        out[~nonzero] = base.normalization
        return out
    return _tabulated_transform(base, omega)


def fourier_transform(p: PeriodizedProfile, t: float):
    """Fourier transform of w_0 at frequency t."""
    if p.nu != 0.0:
        raise ProfileError("fourier_transform requires nu = 0; use fourier_coeff")
    omega = 2.0 * math.pi * t
    return _segment_transform(p.base, omega)


def fejer_coefficient_sum(p: PeriodizedProfile, K: int) -> float:
    """Cesaro (Fejer) evaluation of nu * sum_k w_hat(k).

    Converges to w_nu(0) even at points where the raw Fourier series of a
    discontinuous profile only converges conditionally.
    """
    if p.nu == 0.0:
        raise ProfileError("Fejer summation applies to nu > 0 only")
    ks = np.arange(-K, K + 1)
    coeffs = fourier_coeff_many(p, ks)
    weights = 1.0 - np.abs(ks) / (K + 1)
    return float(np.real(p.nu * np.sum(weights * coeffs)))


def _grid_samples(p: PeriodizedProfile, period: float, n_grid: int) -> np.ndarray:
    h = period / n_grid
    x = np.arange(n_grid) * h
    x = np.where(x > period / 2.0, x - period, x)
    # mean of one-sided limits of the *periodized* function; at a jump of
    # w_nu this is the trapezoid-consistent sample value
    eps = 1e-9
    return 0.5 * (evaluate(p, x - eps) + evaluate(p, x + eps))


def _conv_values_on_grid(p: PeriodizedProfile, lmax: int, n_grid: int) -> np.ndarray:
    """w^{(l)}(0) for l = 1..lmax from one FFT of a jump-averaged sampling."""
    period = _conv_period(p, lmax)
    h = period / n_grid
    w = _grid_samples(p, period, n_grid)
    # scale by h so the frequency-domain powers stay O(1) at any l
    W = np.fft.rfft(w) * h
    out = np.empty(lmax)
    Wl = W.copy()
    for l in range(1, lmax + 1):
        if l > 1:
            Wl *= W
        # value of the l-fold circular convolution at x = 0
        out[l - 1] = float(np.fft.irfft(Wl, n_grid)[0].real) / h
    return out


def self_convolution_sequence(p: PeriodizedProfile, lmax: int,
                              grid_size: int = 1 << 17,
                              with_errors: bool = False):
    """w^{(l)}(0) for l = 1..lmax, Richardson-extrapolated over two grids.

    With jumps aligned to the grid the leading error is O(h) for l = 2
    (two discontinuous factors meet at the jump) and O(h^2) for l >= 3;
    extrapolation removes it.  With off-grid jumps the error is an
    irregular O(h) and the returned bounds are widened accordingly.
    """
    if lmax < 1:
        raise ProfileError("lmax must be >= 1")
    _check_grid(p, grid_size, lmax)
    coarse = _conv_values_on_grid(p, lmax, grid_size // 2)
    fine = _conv_values_on_grid(p, lmax, grid_size)
    orders = np.where(np.arange(1, lmax + 1) == 2, 1, 2)
    extr = fine + (fine - coarse) / (2.0 ** orders - 1.0)
    extr[0] = float(evaluate(p, 0.0))  # l = 1 is just the point value
    if not with_errors:
        return extr
    errs = np.maximum(2.0 * np.abs(fine - coarse), 1e-15)
    errs[0] = 0.0
    jumps = total_jump_variation(p.base)
    if jumps > 0.0 and not conv_grid_aligned(p, lmax, grid_size):
        h = _conv_period(p, lmax) / grid_size
        ls = np.arange(1, lmax + 1)
        errs = errs + 4.0 * ls * jumps * max(p.base.sup_w, 1.0) * h
    return extr, errs


def self_convolution_at_zero(p: PeriodizedProfile, l: int,
                             grid_size: int = 1 << 17) -> float:
    """l-fold self-convolution of the profile, evaluated at 0.

    Circular convolution over the fundamental domain when nu > 0, linear
    convolution on a padded interval when nu = 0.
    """
    if l < 1:
        raise ProfileError("l must be >= 1")
    if l == 1:
        return float(evaluate(p, 0.0))
    return float(self_convolution_sequence(p, l, grid_size)[l - 1])


def _conv_period(p: PeriodizedProfile, lmax: int) -> float:
    if p.nu > 0.0:
        return p.period
    # circular trick: a period wider than the l-fold support makes the
    # wrapped convolution agree with the linear one at 0; a power of two
    # puts the +-1/2 jumps exactly on dyadic grid points
    return float(2 ** math.ceil(math.log2(math.ceil(lmax / 2.0) + 2.0)))


def _check_grid(p: PeriodizedProfile, grid_size: int, lmax: int) -> None:
    if grid_size < 256 or grid_size & (grid_size - 1):
        raise ProfileError("grid_size must be a power of two >= 256")
    period = _conv_period(p, lmax)
    h = period / (grid_size // 2)
    if h > p.base.min_piece_width / 4.0:
        raise ProfileError("grid too small to resolve the profile support")


def total_jump_variation(base: VarianceProfile) -> float:
    """Sum of |jump| over all discontinuities of w.  A tabulated profile
    is continuous inside the support but jumps at +-1/2 when its endpoint
    samples are nonzero."""
    if base.kind == "tabulated":
        return abs(base.grid[0]) + abs(base.grid[-1])
    values = base.values if base.kind == "piecewise" else (1.0,)
    jumps = abs(values[0]) + abs(values[-1])
    jumps += sum(abs(v2 - v1) for v1, v2 in zip(values, values[1:]))
    return jumps


def conv_grid_aligned(p: PeriodizedProfile, lmax: int, grid_size: int) -> bool:
    """True when every discontinuity of w_nu lands on a grid point, in
    which case jump-averaged sampling makes the grid convolution error a
    smooth power of h (Richardson-safe)."""
    h = _conv_period(p, lmax) / grid_size
    edges = p.base.piece_edges
    return all(abs(e / h - round(e / h)) < 1e-9 for e in edges)


def profile_from_config(cfg: dict) -> VarianceProfile:
    """Build a profile from its JSON declaration."""
    kind = cfg.get("kind")
    if kind == "uniform":
        return VarianceProfile.uniform()
    if kind == "piecewise":
        return VarianceProfile.piecewise(cfg["breaks"], cfg["values"])
    if kind == "tabulated":
        return VarianceProfile.tabulated(cfg["grid"])
    raise ProfileError(f"unknown profile kind {kind!r}")
