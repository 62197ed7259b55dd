"""Closed-form limiting quantities for the band-matrix CLT.

Covers the covariance kernel sigma(z, eta-bar), limiting covariances of
linear statistics via double contour quadrature, monomial variances
through Fourier and convolution routes, sinc-power integrals, the
Irwin-Hall density, and Eulerian numbers.

The kernel is evaluated through the absolutely convergent expansion

    sigma(u) = sum_{l >= 1} l * u^{-l-1} * w^{(l)}(0),      u = z * conj(eta),

where w^{(l)} is the l-fold self-convolution of the profile (circular
for nu > 0, linear for nu = 0); the raw Fourier series/integral forms
have conditionally convergent 1/k parts and are never summed directly.
For the uniform profile the coefficients have an exact closed form:
w^{(l)}(0) is the Irwin-Hall density of l uniforms at 0, periodized over
the 1/nu lattice when nu > 0 (Poisson summation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .les import TestFunction
from .profiles import (
    PeriodizedProfile,
    VarianceProfile,
    evaluate,
    fejer_coefficient_sum,
    fourier_coeff_many,
    fourier_transform,
    self_convolution_sequence,
    total_jump_variation,
)

__all__ = ["KernelParams", "TheoryVariance", "kernel", "monomial_variance",
           "monomial_variance_fourier_path", "monomial_variance_convolution_path",
           "sinc_power_integral", "sinc_power_integral_exact",
           "irwin_hall_pdf", "eulerian", "limiting_covariance",
           "limiting_covariance_series", "pseudo_covariance",
           "uniform_variance_exact"]


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class KernelParams:
    profile: PeriodizedProfile
    nu: float
    series_truncation: int = 100_000
    integral_truncation: float = 50.0
    nodes_per_unit: int = 64
    contour_radius: float = 1.25
    contour_nodes: int = 512
    conv_grid: int = 1 << 18

    def __post_init__(self):
        if self.nu > 0.0 and self.series_truncation < 64:
            raise TheoryError("series truncation must be >= 64")
        if self.nu == 0.0 and (self.integral_truncation < 50
                               or self.nodes_per_unit < 32):
            raise TheoryError("need integral_truncation >= 50 and >= 32 nodes")
        if self.contour_radius <= 1.0:
            raise TheoryError("contour radius must exceed 1")
        if self.nu != self.profile.nu:
            raise TheoryError("params.nu disagrees with profile.nu")


@dataclass(frozen=True)
class TheoryVariance:
    value: complex
    method: str  # FourierSeries | ConvolutionSeries | ContourQuadrature | ClosedForm
    truncation: dict
    trunc_error: float

    @property
    def real_value(self) -> float:
        return float(np.real(self.value))


# ---------------------------------------------------------------------------
# combinatorial closed forms


def sinc_power_integral_exact(l: int) -> Fraction:
    """(1/pi) * integral of sinc^l over the line, as an exact rational."""
    if l < 1:
        raise TheoryError("l must be >= 1")
    acc = Fraction(0)
    for i in range(l // 2 + 1):
        acc += (-1) ** i * math.comb(l, i) * (Fraction(l, 2) - i) ** (l - 1)
    return acc / math.factorial(l - 1)


def sinc_power_integral(l: int) -> float:
    return float(sinc_power_integral_exact(l))


def irwin_hall_pdf(m: int, x: float) -> float:
    """Density of a sum of m independent Uniform[-1/2, 1/2] variables."""
    if m < 1:
        raise TheoryError("m must be >= 1")
    if abs(x) > m / 2.0:
        return 0.0
    if m == 1:
        return 1.0
    s = x + m / 2.0
    acc = 0.0
    for i in range(int(math.floor(s)) + 1):
        acc += (-1) ** i * math.comb(m, i) * (s - i) ** (m - 1)
    return acc / math.factorial(m - 1)


@lru_cache(maxsize=None)
def eulerian(nrows: int, m: int) -> int:
    """A(n, m): permutations of {1..n} with exactly m ascents."""
    if nrows < 1:
        raise TheoryError("nrows must be >= 1")
    if nrows > 20:
        raise TheoryError("nrows > 20 exceeds the supported range")
    if m < 0 or m >= nrows:
        return 0
    if nrows == 1:
        return 1
    return (m + 1) * eulerian(nrows - 1, m) + (nrows - m) * eulerian(nrows - 1, m - 1)


def uniform_variance_exact(l: int) -> Fraction:
    """Limiting monomial variance at nu = 0, uniform profile, as an exact
    rational: l * (1/pi) * integral of sinc^l."""
    return l * sinc_power_integral_exact(l)


# ---------------------------------------------------------------------------
# self-convolution coefficients


def _irwin_hall_stable(m: int, xs: np.ndarray) -> np.ndarray:
    """Irwin-Hall density at several points; de Boor recursion for large m.

    p_m is the centered cardinal B-spline of order m; the alternating-sum
    formula loses all precision past m ~ 25, the spline recursion is
    backward stable at any order.
    """
    if m <= 12:
        return np.array([irwin_hall_pdf(m, float(x)) for x in xs])
    from scipy.interpolate import BSpline

    b = BSpline.basis_element(np.arange(m + 1.0), extrapolate=False)
    vals = b(np.asarray(xs, dtype=float) + m / 2.0)
    return np.nan_to_num(vals, nan=0.0)


def _uniform_conv_zero(nu: float, lmax: int) -> np.ndarray:
    """w^{(l)}(0) for the uniform profile, l = 1..lmax.

    nu = 0: Irwin-Hall density at 0.  nu > 0: the circular convolution is
    the 1/nu-periodization of the linear one, so its value at 0 is the
    Irwin-Hall density summed over the 1/nu lattice.
    """
    out = np.empty(lmax)
    for l in range(1, lmax + 1):
        if nu == 0.0:
            out[l - 1] = float(_irwin_hall_stable(l, np.array([0.0]))[0])
        else:
            mmax = int(math.floor(l * nu / 2.0)) + 1
            pts = np.arange(-mmax, mmax + 1) / nu
            out[l - 1] = float(np.sum(_irwin_hall_stable(l, pts)))
    return out


@lru_cache(maxsize=16)
def _conv_zero_cached(profile: PeriodizedProfile, lmax: int,
                      grid: int) -> tuple[np.ndarray, np.ndarray]:
    """(w^{(l)}(0) for l = 1..lmax, per-l error bounds)."""
    if profile.base.kind == "uniform":
        return _uniform_conv_zero(profile.nu, lmax), np.zeros(lmax)
    return self_convolution_sequence(profile, lmax, grid, with_errors=True)


def _series_length(umin: float) -> int:
    r = 1.0 / umin
    lmax = 8
    while lmax < 2000 and (lmax + 1) * r ** (lmax + 1) > 1e-16:
        lmax += 8
    return lmax


# ---------------------------------------------------------------------------
# covariance kernel


def _kernel_values(params: KernelParams, u: np.ndarray) -> np.ndarray:
    """sigma on an array of u = z * conj(eta) values, |u| > 1."""
    umin = float(np.min(np.abs(u)))
    if umin <= 1.0 + 1e-9:
        raise TheoryError(f"|z * conj(eta)| = {umin:.6g} is not > 1")
    lmax = _series_length(umin)
    conv, _ = _conv_zero_cached(params.profile, lmax, params.conv_grid)
    ls = np.arange(1, lmax + 1)
    powers = np.power.outer(np.asarray(u, dtype=np.complex128), -(ls + 1.0))
    return powers @ (ls * conv)


def kernel(params: KernelParams, z: complex, eta: complex) -> complex:
    """sigma(z, eta-bar), analytic for |z * conj(eta)| > 1."""
    u = complex(z) * np.conj(complex(eta))
    return complex(_kernel_values(params, np.array([u]))[0])


# ---------------------------------------------------------------------------
# monomial variances


def _as_periodized(profile, nu: float) -> PeriodizedProfile:
    if isinstance(profile, PeriodizedProfile):
        if profile.nu != nu:
            raise TheoryError("profile.nu disagrees with requested nu")
        return profile
    if not isinstance(profile, VarianceProfile):
        raise TheoryError("expected a VarianceProfile or PeriodizedProfile")
    return PeriodizedProfile(base=profile, nu=nu)


def monomial_variance(profile, nu: float, l: int,
                      conv_grid: int = 1 << 18) -> TheoryVariance:
    """V_nu(z^l) = l * w^{(l)}(0): limiting variance of the degree-l
    monomial statistic.  Exact closed form for the uniform profile,
    extrapolated grid convolution otherwise."""
    if l < 1:
        raise TheoryError("l must be >= 1")
    p = _as_periodized(profile, nu)
    if p.base.kind == "uniform":
        if nu == 0.0:
            value = float(uniform_variance_exact(l))
        else:
            value = l * float(_uniform_conv_zero(nu, l)[l - 1])
        return TheoryVariance(value=value, method="ClosedForm",
                              truncation={}, trunc_error=0.0)
    if l == 1:
        # V(z) = w_nu(0); the power-1 Fourier series/integral is only
        # conditionally convergent for discontinuous profiles
        return TheoryVariance(value=float(evaluate(p, 0.0)),
                              method="ClosedForm", truncation={},
                              trunc_error=0.0)
    values, errs = self_convolution_sequence(p, l, conv_grid,
                                             with_errors=True)
    return TheoryVariance(value=l * float(values[l - 1]),
                          method="ConvolutionSeries",
                          truncation={"grid": conv_grid},
                          trunc_error=l * float(errs[l - 1]))


def _coeff_decay_const(p: PeriodizedProfile) -> float:
    """A with |w_hat(k)| <= A / |k| (total jump variation over 2 pi nu)."""
    jumps = total_jump_variation(p.base)
    if jumps == 0.0:
        jumps = 4.0 * p.base.sup_w  # continuous profile; conservative
    return jumps / (2.0 * math.pi * (p.nu if p.nu > 0 else 1.0))


def _fourier_power_sum(p: PeriodizedProfile, l: int, tol: float = 1e-12,
                       kcap: int = 1_000_000) -> tuple[float, int, float]:
    """sum_k w_hat(k)^l by adaptive symmetric truncation, l >= 2.

    Chunked and vectorized; stops when either the analytic 1/k^l tail
    bound or an empirical end-of-chunk estimate drops below tol, or at
    K = 10^6.
    """
    A = _coeff_decay_const(p)
    acc = complex(fourier_coeff_many(p, np.array([0]))[0]) ** l
    chunk = 8192
    k0 = 1
    err = math.inf
    while True:
        ks = np.arange(k0, k0 + chunk)
        pos = fourier_coeff_many(p, ks) ** l
        neg = fourier_coeff_many(p, -ks) ** l
        acc += complex(np.sum(pos) + np.sum(neg))
        K = k0 + chunk - 1
        analytic = 2.0 * A**l / ((l - 1) * K ** (l - 1))
        # tail ~ |t(K)| * K / (l - 1) for |t(k)| ~ k^{-l} or faster
        t_last = float(np.max(np.abs(pos[-64:]) + np.abs(neg[-64:])))
        empirical = 4.0 * t_last * K / (l - 1)
        err = min(analytic, empirical)
        if err < tol or K >= kcap:
            break
        k0 += chunk
        chunk = min(2 * chunk, 1 << 19)
    return float(np.real(acc)), K, err


def monomial_variance_fourier_path(profile, nu: float, l: int) -> tuple[float, float]:
    """Fourier-route value of V_nu(z^l) and its truncation error estimate.

    This is the dual, independent evaluation route: the k-series for
    nu > 0 (Fejer-summed at l = 1), the t-integral of the transform for
    nu = 0, l >= 2.
    """
    p = _as_periodized(profile, nu)
    if nu > 0.0:
        if l == 1:
            return fejer_coefficient_sum(p, 20_000), 1e-3
        value, _, err = _fourier_power_sum(p, l)
        return l * nu * value, l * nu * err
    if l == 1:
        raise TheoryError("the t-integral of w_hat_0 is only conditionally "
                          "convergent; use the convolution route for l = 1")
    from scipy.integrate import quad

    def integrand(t):
        return np.real(complex(fourier_transform(p, t)) ** l)

    T = 200.0
    total = 0.0
    for a in np.arange(0.0, T, 5.0):
        val, _ = quad(integrand, a, a + 5.0, limit=200)
        total += val
    A = _coeff_decay_const(p)
    tail = 2.0 * A**l / ((l - 1) * T ** (l - 1))
    return float(l * 2.0 * total), float(l * tail + 1e-10)


def monomial_variance_convolution_path(profile, nu: float, l: int,
                                       conv_grid: int = 1 << 17) -> float:
    """Grid-convolution route l * w^{(l)}(0), for dual-path checks."""
    p = _as_periodized(profile, nu)
    return l * float(self_convolution_sequence(p, l, conv_grid)[l - 1])


# ---------------------------------------------------------------------------
# limiting covariance by double contour quadrature


def _contour_quadrature(params: KernelParams, f_i: TestFunction,
                        f_j: TestFunction, n_nodes: int,
                        sigma_override: np.ndarray | None = None) -> complex:
    R = params.contour_radius
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    z = R * np.exp(1j * theta)
    fi = np.asarray(f_i.at(z), dtype=np.complex128)
    fj = np.conj(np.asarray(f_j.at(z), dtype=np.complex128))
    if sigma_override is None:
        # sigma depends only on u = R^2 e^{i(theta_a - theta_b)}
        u = R**2 * np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes)
        sigma = _kernel_values(params, u)
    else:
        sigma = sigma_override
    a = np.arange(n_nodes)
    diff = (a[:, None] - a[None, :]) % n_nodes
    g1 = fi * np.exp(1j * theta)
    g2 = fj * np.exp(-1j * theta)
    total = g1 @ sigma[diff] @ g2
    # z-contour positively oriented; the orientation of the eta-bar
    # contour is fixed so the full-matrix monomial variance is +k
    return complex((1.0 / (4.0 * np.pi**2)) * (2.0 * np.pi / n_nodes) ** 2
                   * R**2 * total)


def limiting_covariance(f_i: TestFunction, f_j: TestFunction,
                        params: KernelParams) -> TheoryVariance:
    """Sigma_ij for a pair of analytic test functions."""
    for f in (f_i, f_j):
        if f.kind == "analytic" and f.radius <= 1.0:
            raise TheoryError("test function must be analytic on a disk of "
                              "radius > 1")
    n = params.contour_nodes
    coarse = _contour_quadrature(params, f_i, f_j, n // 2)
    fine = _contour_quadrature(params, f_i, f_j, n)
    err = abs(fine - coarse) + _kernel_coeff_error(params, f_i, f_j)
    return TheoryVariance(value=fine, method="ContourQuadrature",
                          truncation={"nodes": n,
                                      "radius": params.contour_radius},
                          trunc_error=float(err))


def _kernel_coeff_error(params: KernelParams, f_i: TestFunction,
                        f_j: TestFunction) -> float:
    """Propagated effect of grid-convolution coefficient errors on the
    quadrature value (zero for the uniform profile's exact coefficients)."""
    R = params.contour_radius
    lmax = _series_length(R * R)
    _, errs = _conv_zero_cached(params.profile, lmax, params.conv_grid)
    if not np.any(errs):
        return 0.0
    ls = np.arange(1, lmax + 1)
    sigma_err = float(np.sum(ls * errs * (R * R) ** -(ls + 1.0)))
    theta = 2.0 * np.pi * np.arange(256) / 256
    z = R * np.exp(1j * theta)
    fmax_i = float(np.max(np.abs(f_i.at(z))))
    fmax_j = float(np.max(np.abs(f_j.at(z))))
    return R * R * fmax_i * fmax_j * sigma_err


def limiting_covariance_series(f_i: TestFunction, f_j: TestFunction,
                               params: KernelParams) -> TheoryVariance:
    """Monomial x monomial short-cut: V for equal degrees, 0 otherwise."""
    if f_i.kind != "monomial" or f_j.kind != "monomial":
        raise TheoryError("series short-cut applies to monomials only")
    if f_i.degree != f_j.degree:
        return TheoryVariance(value=0.0, method="FourierSeries",
                              truncation={}, trunc_error=0.0)
    return monomial_variance(params.profile, params.nu, f_i.degree,
                             conv_grid=params.conv_grid)


def pseudo_covariance(f_i: TestFunction, f_j: TestFunction,
                      params: KernelParams) -> complex:
    """Upsilon_ij.  With both resolvents unconjugated every moment pairing
    vanishes in the limit, so the pseudo-kernel is identically zero on the
    contours; the quadrature is still run against it so the Monte Carlo
    pseudo-variance has a theory counterpart."""
    n = params.contour_nodes
    zero_kernel = np.zeros(n, dtype=np.complex128)
    return _contour_quadrature(params, f_i, f_j, n,
                               sigma_override=zero_kernel)
