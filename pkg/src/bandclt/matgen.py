"""Sampling of non-Hermitian band ensembles with a variance profile.

Three ensemble topologies: a periodic band matrix scaled by the
periodized profile w_nu (nu > 0), a periodic band matrix with the wrap
contributions of the non-periodized profile w_0, and a plain truncated
band matrix with w_0.  Entry (i, j) is x_ij * sqrt(w((i-j)/c_n)) / sqrt(c_n)
with x_ij i.i.d. standard complex Gaussian.

Randomness is counter-based (Philox keyed by seed and replicate index),
so replicates are bit-reproducible and independent without coordination
between workers.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np

from .profiles import PeriodizedProfile, evaluate

__all__ = ["Topology", "BandSpec", "BandMatrix", "EntryLaw", "sample",
           "band_index_set", "to_dense"]

DENSE_LIMIT_DEFAULT = 4096

_MAGIC = b"bandmat v1\n"


class SpecError(ValueError):
    """Invalid ensemble geometry."""


class Topology(enum.Enum):
    PERIODIC_NU = "periodic-nu"
    PERIODIC_ZERO = "periodic-zero"
    NONPERIODIC_ZERO = "nonperiodic-zero"

    @property
    def periodic(self) -> bool:
        return self is not Topology.NONPERIODIC_ZERO


@dataclass(frozen=True)
class BandSpec:
    n: int
    b_n: int
    nu: float
    topology: Topology
    profile: PeriodizedProfile

    def __post_init__(self):
        if self.n < 4:
            raise SpecError("n must be >= 4")
        if self.b_n < 0:
            raise SpecError("b_n must be >= 0")
        if self.c_n > self.n:
            raise SpecError("c_n = 2*b_n + 1 must not exceed n")
        if not 0.0 <= self.nu <= 1.0:
            raise SpecError("nu must be in [0, 1]")
        if self.topology is Topology.PERIODIC_NU:
            if self.profile.nu <= 0.0:
                raise SpecError("periodic-nu requires a periodized profile")
            if self.profile.nu != self.nu:
                raise SpecError("profile.nu must equal spec.nu for periodic-nu")
        else:
            if self.profile.nu != 0.0:
                raise SpecError(f"{self.topology.value} requires profile.nu = 0")
        if self.topology is Topology.NONPERIODIC_ZERO and self.nu > 0.0:
            # no limiting variance formula exists for this combination
            raise SpecError("non-periodic topology with nu > 0 is not supported")

    @property
    def c_n(self) -> int:
        return 2 * self.b_n + 1


@dataclass(frozen=True)
class EntryLaw:
    kind: str = "complex-gaussian"

    def __post_init__(self):
        if self.kind != "complex-gaussian":
            raise SpecError(f"unsupported entry law {self.kind!r}")


@dataclass(frozen=True)
class BandMatrix:
    """Band-stored sample: bands[i, b_n + d] = m_{i, (i+d) mod n}."""

    spec: BandSpec
    bands: np.ndarray
    seed: int = 0
    replicate: int = 0

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def b_n(self) -> int:
        return self.spec.b_n


def offset_weights(spec: BandSpec) -> np.ndarray:
    """sqrt-profile factor per stored offset d = j - i, d in [-b_n, b_n]."""
    d = np.arange(-spec.b_n, spec.b_n + 1)
    diff = -d  # the profile argument is (i - j) / c_n
    c = spec.c_n
    p = spec.profile
    if spec.topology is Topology.PERIODIC_NU:
        return np.sqrt(evaluate(p, diff / c))
    w = np.sqrt(evaluate(p, diff / c))
    if spec.topology is Topology.PERIODIC_ZERO:
        # wrap terms share the same x_ij (three-term sum)
        w = w + np.sqrt(evaluate(p, (diff + spec.n) / c)) \
              + np.sqrt(evaluate(p, (diff - spec.n) / c))
    return w


def sample(spec: BandSpec, law: EntryLaw, seed: int, replicate_index: int) -> BandMatrix:
    """Draw one matrix; (seed, replicate_index) determines it bit-for-bit."""
    n, c = spec.n, spec.c_n
    rng = np.random.Generator(np.random.Philox(key=[seed, replicate_index]))
    g = rng.standard_normal((n, c, 2))
    x = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
    bands = x * (offset_weights(spec) / np.sqrt(c))
    if spec.topology is Topology.NONPERIODIC_ZERO:
        rows = np.arange(n)[:, None]
        d = np.arange(-spec.b_n, spec.b_n + 1)[None, :]
        cols = rows + d
        bands = np.where((cols >= 0) & (cols < n), bands, 0.0)
    return BandMatrix(spec=spec, bands=np.ascontiguousarray(bands),
                      seed=seed, replicate=replicate_index)


def band_index_set(spec: BandSpec, j: int) -> set[int]:
    """Row indices with a stored entry in column j (0-based)."""
    if not 0 <= j < spec.n:
        raise SpecError(f"column index {j} out of range")
    n, b = spec.n, spec.b_n
    out = set()
    for i in range(n):
        dist = abs(i - j)
        if spec.topology.periodic:
            dist = min(dist, n - dist)
        if dist <= b:
            out.add(i)
    return out


def to_dense(m: BandMatrix, dense_limit: int = DENSE_LIMIT_DEFAULT) -> np.ndarray:
    """Materialize the full n x n matrix."""
    n = m.n
    if n > dense_limit:
        raise SpecError(f"n = {n} exceeds dense_limit = {dense_limit}")
    return band_to_dense(m.bands, m.b_n, n, m.spec.topology.periodic)


def band_to_dense(bands: np.ndarray, half_bw: int, n: int,
                  periodic: bool) -> np.ndarray:
    out = np.zeros((n, n), dtype=np.complex128)
    rows = np.arange(n)
    for d in range(-half_bw, half_bw + 1):
        cols = rows + d
        if periodic:
            out[rows, cols % n] += bands[:, half_bw + d]
        else:
            ok = (cols >= 0) & (cols < n)
            out[rows[ok], cols[ok]] = bands[ok, half_bw + d]
    return out


def dump_bandmat(m: BandMatrix, path) -> None:
    """Binary dump: magic + header + little-endian complex64 band payload."""
    topo_code = list(Topology).index(m.spec.topology)
    header = struct.pack("<qqBqq", m.n, m.b_n, topo_code, m.seed, m.replicate)
    payload = m.bands.astype("<c8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(header)
        fh.write(payload)


def load_bandmat_header(path) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise SpecError("not a bandmat v1 file")
        n, b_n, topo_code, seed, replicate = struct.unpack("<qqBqq",
                                                           fh.read(33))
    return {"n": n, "b_n": b_n,
            "topology": list(Topology)[topo_code].value,
            "seed": seed, "replicate": replicate}
