"""Linear eigenvalue statistics of a sampled band matrix.

Monomial statistics go through exact trace-of-power band multiplication
(no eigensolver); the bandwidth of the running power grows by b_n per
step and the representation switches to dense once the band stops
paying for itself.  Analytic test functions use the dense spectrum.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .backends import band_diag_inner, band_matvec, band_mul
from .matgen import DENSE_LIMIT_DEFAULT, BandMatrix, band_to_dense, to_dense

__all__ = ["TestFunction", "LesSample", "trace_power", "trace_powers",
           "les_delta", "spectrum", "resolvent_trace", "spectral_norm"]


class LesError(ValueError):
    pass


class EigensolverError(RuntimeError):
    """Dense eigensolver failed to converge for one replicate."""

    def __init__(self, replicate: int, message: str):
        super().__init__(f"replicate {replicate}: {message}")
        self.replicate = replicate


@dataclass(frozen=True)
class TestFunction:
    kind: str  # "monomial" | "polynomial" | "analytic"
    degree: int = 0
    coeffs: tuple[complex, ...] = ()
    func: Optional[Callable[[complex], complex]] = field(default=None, compare=False)
    radius: float = 0.0
    label: str = ""

    @classmethod
    def monomial(cls, l: int) -> "TestFunction":
        if l < 1:
            raise LesError("monomial degree must be >= 1")
        return cls(kind="monomial", degree=l, label=f"z^{l}" if l > 1 else "z")

    @classmethod
    def polynomial(cls, coeffs) -> "TestFunction":
        coeffs = tuple(complex(c) for c in coeffs)
        if not coeffs:
            raise LesError("polynomial needs at least one coefficient")
        return cls(kind="polynomial", degree=len(coeffs) - 1, coeffs=coeffs,
                   label="poly[" + ",".join(f"{c:g}" for c in coeffs) + "]")

    @classmethod
    def analytic(cls, func, radius: float, label: str = "analytic") -> "TestFunction":
        if radius <= 0:
            raise LesError("analytic test function needs a declared radius > 0")
        return cls(kind="analytic", func=func, radius=radius, label=label)

    @classmethod
    def parse(cls, text: str) -> "TestFunction":
        """Parse "z", "z2", "z^3" style monomial labels."""
        m = re.fullmatch(r"z\^?(\d*)", text.strip())
        if not m:
            raise LesError(f"cannot parse test function {text!r}")
        return cls.monomial(int(m.group(1) or 1))

    def at(self, z):
        if self.kind == "monomial":
            return np.asarray(z) ** self.degree
        if self.kind == "polynomial":
            return np.polyval(self.coeffs[::-1], np.asarray(z))
        return np.vectorize(self.func)(z)

    def value_at_zero(self) -> complex:
        if self.kind == "monomial":
            return 0.0
        if self.kind == "polynomial":
            return self.coeffs[0]
        return complex(self.func(0.0))


@dataclass(frozen=True)
class LesSample:
    value: complex
    replicate_index: int
    function: str

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise LesError("non-finite LES sample")


class _RunningPower:
    """M^j kept in band storage while narrow, dense afterwards."""

    def __init__(self, m: BandMatrix):
        self.m = m
        self.n = m.n
        self.periodic = m.spec.topology.periodic
        self.bands = m.bands
        self.half_bw = m.b_n
        self.dense: Optional[np.ndarray] = None
        self._m_dense: Optional[np.ndarray] = None

    def _matrix_dense(self) -> np.ndarray:
        if self._m_dense is None:
            self._m_dense = band_to_dense(self.m.bands, self.m.b_n, self.n,
                                          self.periodic)
        return self._m_dense

    def step(self) -> None:
        """Multiply the running power by M once more."""
        if self.dense is not None:
            self.dense = self.dense @ self._matrix_dense()
            return
        if (self.half_bw + self.m.b_n) * 2 + 1 >= self.n:
            self.dense = band_to_dense(self.bands, self.half_bw, self.n,
                                       self.periodic) @ self._matrix_dense()
            self.bands = None
            return
        self.bands, self.half_bw = band_mul(self.bands, self.half_bw,
                                            self.m.bands, self.m.b_n,
                                            self.periodic)

    def trace(self) -> complex:
        if self.dense is not None:
            return complex(np.trace(self.dense))
        return complex(self.bands[:, self.half_bw].sum())

    def trace_times_m(self) -> complex:
        """tr(P @ M) without forming the product."""
        if self.dense is not None:
            md = self._matrix_dense()
            return complex(np.sum(self.dense * md.T))
        return band_diag_inner(self.bands, self.half_bw, self.m.bands,
                               self.m.b_n, self.periodic)


def trace_powers(m: BandMatrix, lmax: int) -> list[complex]:
    """[tr M, tr M^2, ..., tr M^lmax], exact up to floating point."""
    if lmax < 1:
        raise LesError("lmax must be >= 1")
    run = _RunningPower(m)
    out = [run.trace()]
    for l in range(2, lmax + 1):
        out.append(run.trace_times_m())
        if l < lmax:
            run.step()
    return out


def trace_power(m: BandMatrix, l: int) -> complex:
    """tr M^l; l = 0 returns n by convention."""
    if l < 0:
        raise LesError("negative power")
    if l == 0:
        return complex(m.n)
    return trace_powers(m, l)[l - 1]


def les_delta(m: BandMatrix, f: TestFunction, replicate_index: int = 0,
              dense_limit: int = DENSE_LIMIT_DEFAULT) -> LesSample:
    """One realization of sqrt(c_n/n) * (L_f(M) - n f(0))."""
    scale = np.sqrt(m.spec.c_n / m.n)
    if f.kind == "monomial":
        value = scale * trace_power(m, f.degree)
    elif f.kind == "polynomial":
        traces = trace_powers(m, f.degree) if f.degree >= 1 else []
        value = scale * sum(c * t for c, t in zip(f.coeffs[1:], traces))
    else:
        if m.n > dense_limit:
            raise LesError(
                "analytic test function needs the dense spectrum; "
                f"n = {m.n} exceeds dense_limit = {dense_limit}; "
                "use a polynomial truncation instead")
        lam = spectrum(m, dense_limit=dense_limit)
        value = scale * (np.sum(f.at(lam)) - m.n * f.value_at_zero())
    return LesSample(value=complex(value), replicate_index=replicate_index,
                     function=f.label)


def spectrum(m: BandMatrix, replicate_index: int = 0,
             dense_limit: int = DENSE_LIMIT_DEFAULT) -> np.ndarray:
    """Eigenvalues of the densified matrix (order unspecified)."""
    dense = to_dense(m, dense_limit=dense_limit)
    try:
        return np.linalg.eigvals(dense)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(replicate_index, str(exc)) from exc


def resolvent_trace(m: BandMatrix, z: complex, method: str = "lu",
                    neumann_terms: int = 40,
                    dense_limit: int = DENSE_LIMIT_DEFAULT) -> complex:
    """tr (zI - M)^{-1} - n/z, by LU of the dense matrix or Neumann series."""
    if z == 0:
        raise LesError("z = 0 is never in the resolvent domain")
    if method == "neumann":
        traces = trace_powers(m, neumann_terms)
        powers = z ** -(np.arange(1, neumann_terms + 1) + 1.0)
        return complex(np.sum(powers * np.asarray(traces)))
    if method != "lu":
        raise LesError(f"unknown resolvent method {method!r}")
    import scipy.linalg as sla

    dense = to_dense(m, dense_limit=dense_limit)
    a = z * np.eye(m.n) - dense
    try:
        inv = sla.inv(a)
    except sla.LinAlgError as exc:
        raise LesError(f"zI - M is singular at z = {z}") from exc
    return complex(np.trace(inv) - m.n / z)


def _adjoint_bands(bands: np.ndarray, b: int, periodic: bool) -> np.ndarray:
    """Band storage of M*: (M*)[i, i+d] = conj(M[i+d, i])."""
    n = bands.shape[0]
    out = np.zeros_like(bands)
    for d in range(-b, b + 1):
        col = np.conj(bands[:, b - d])
        if periodic:
            out[:, b + d] = np.roll(col, -d)
        elif d > 0:
            out[:-d, b + d] = col[d:]
        elif d < 0:
            out[-d:, b + d] = col[:d]
        else:
            out[:, b] = col
    return out


def spectral_norm(m: BandMatrix, iters: int = 30) -> float:
    """Power iteration on M*M; a lower bound converging to ||M||."""
    if iters < 10:
        raise LesError("iters must be >= 10")
    n = m.n
    periodic = m.spec.topology.periodic
    rng = np.random.Generator(np.random.Philox(key=[m.seed ^ 0x5EED, m.replicate]))
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    adj = np.ascontiguousarray(_adjoint_bands(m.bands, m.b_n, periodic))
    sigma2 = 0.0
    for _ in range(iters):
        y = band_matvec(m.bands, m.b_n, v, periodic)
        w = band_matvec(adj, m.b_n, y, periodic)
        sigma2 = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return float(np.sqrt(max(sigma2, 0.0)))
