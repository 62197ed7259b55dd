"""Monte Carlo driver for the band-matrix CLT.

Runs N replicates (sample matrix -> LES samples for every requested test
function), aggregates means, variances, pseudo-variances and pairwise
covariances, compares them to the limiting theory, and persists a JSON
report plus a CSV of raw samples.

Replicates are keyed by (seed, replicate_index) through a counter-based
RNG, and aggregation always reduces the collected per-replicate rows in
replicate order, so the results are bit-identical for any worker count.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .les import TestFunction, les_delta, spectral_norm, trace_powers
from .matgen import (DENSE_LIMIT_DEFAULT, BandSpec, EntryLaw, Topology,
                     sample)
from .profiles import PeriodizedProfile, profile_from_config
from .theory import KernelParams, limiting_covariance, limiting_covariance_series

__all__ = ["ExperimentConfig", "ExperimentReport", "FunctionStats", "run",
           "heatmap_data", "normality_diagnostics", "write_report",
           "write_samples_csv", "config_from_json", "atomic_write_text"]


class ExperimentError(ValueError):
    pass


class PartialRunError(RuntimeError):
    """A worker failed mid-run; carries the completed replicate count."""

    def __init__(self, completed: int, message: str):
        super().__init__(f"{message} (completed {completed} replicates)")
        self.completed = completed


@dataclass(frozen=True)
class ExperimentConfig:
    spec: BandSpec
    law: EntryLaw
    functions: tuple[TestFunction, ...]
    replicates: int
    seed: int
    workers: int = 1
    rho_check: float = 3.0
    compute_norms: bool = False
    dense_limit: int = DENSE_LIMIT_DEFAULT

    def __post_init__(self):
        if self.replicates < 2:
            raise ExperimentError("need at least 2 replicates")
        if not self.functions:
            raise ExperimentError("need at least one test function")
        if self.workers < 1:
            raise ExperimentError("workers must be >= 1")
        for f in self.functions:
            if f.kind == "analytic" and self.spec.n > self.dense_limit:
                raise ExperimentError(
                    f"analytic function {f.label!r} needs n <= dense_limit")

    def to_dict(self) -> dict:
        prof = self.spec.profile.base
        if prof.kind == "uniform":
            pdict = {"kind": "uniform"}
        elif prof.kind == "piecewise":
            pdict = {"kind": "piecewise", "breaks": list(prof.breaks),
                     "values": list(prof.values)}
        else:
            pdict = {"kind": "tabulated", "grid": list(prof.grid)}
        return {
            "n": self.spec.n,
            "b_n": self.spec.b_n,
            "nu": self.spec.nu,
            "topology": self.spec.topology.value,
            "profile": pdict,
            "entry_law": self.law.kind,
            "functions": [f.label for f in self.functions],
            "replicates": self.replicates,
            "seed": self.seed,
            "workers": self.workers,
            "rho_check": self.rho_check,
            "compute_norms": self.compute_norms,
        }


def config_from_json(cfg: dict) -> ExperimentConfig:
    """Build a config from its JSON form (the to_dict round-trip)."""
    try:
        base = profile_from_config(cfg.get("profile", {"kind": "uniform"}))
        nu = float(cfg.get("nu", 0.0))
        topology = Topology(cfg.get("topology", "periodic-zero"))
        profile_nu = nu if topology is Topology.PERIODIC_NU else 0.0
        spec = BandSpec(n=int(cfg["n"]), b_n=int(cfg["b_n"]), nu=nu,
                        topology=topology,
                        profile=PeriodizedProfile(base=base, nu=profile_nu))
        functions = tuple(TestFunction.parse(s) for s in cfg["functions"])
        return ExperimentConfig(
            spec=spec,
            law=EntryLaw(cfg.get("entry_law", "complex-gaussian")),
            functions=functions,
            replicates=int(cfg["replicates"]),
            seed=int(cfg.get("seed", 0)),
            workers=int(cfg.get("workers", 1)),
            rho_check=float(cfg.get("rho_check", 3.0)),
            compute_norms=bool(cfg.get("compute_norms", False)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ExperimentError):
            raise
        raise ExperimentError(f"invalid config: {exc}") from exc


@dataclass(frozen=True)
class FunctionStats:
    label: str
    mean: complex
    variance: float          # E|X - mean|^2, sesquilinear
    pseudo_variance: complex  # E[(X - mean)^2], no conjugation
    theory_value: float
    theory_method: str
    theory_trunc_error: float
    z_score: float
    diagnostics: dict | None

    def to_dict(self) -> dict:
        return {
            "function": self.label,
            "mean_re": self.mean.real, "mean_im": self.mean.imag,
            "variance": self.variance,
            "pseudo_variance_re": self.pseudo_variance.real,
            "pseudo_variance_im": self.pseudo_variance.imag,
            "theory_value": self.theory_value,
            "theory_method": self.theory_method,
            "theory_trunc_error": self.theory_trunc_error,
            "z_score": self.z_score,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    stats: tuple[FunctionStats, ...]
    cross: tuple[dict, ...]
    norm_exceed_count: int | None
    norm_total: int | None
    replicates: int
    seed: int
    version: str = __version__
    timestamp: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "functions": [s.to_dict() for s in self.stats],
            "cross_covariances": list(self.cross),
            "norm_exceed_count": self.norm_exceed_count,
            "norm_total": self.norm_total,
            "replicates": self.replicates,
            "seed": self.seed,
            "version": self.version,
            "timestamp": self.timestamp,
        }


def _replicate_values(config: ExperimentConfig, r: int):
    """One replicate: (r, LES value per function, optional norm)."""
    m = sample(config.spec, config.law, config.seed, r)
    degrees = [f.degree for f in config.functions
               if f.kind in ("monomial", "polynomial")]
    traces = trace_powers(m, max(degrees)) if degrees else []
    scale = np.sqrt(m.spec.c_n / m.n)
    values = []
    for f in config.functions:
        if f.kind == "monomial":
            values.append(scale * traces[f.degree - 1])
        elif f.kind == "polynomial":
            values.append(scale * sum(c * t
                                      for c, t in zip(f.coeffs[1:], traces)))
        else:
            values.append(les_delta(m, f, replicate_index=r,
                                    dense_limit=config.dense_limit).value)
    norm = spectral_norm(m) if config.compute_norms else None
    return r, values, norm


def _effective_workers(config: ExperimentConfig) -> int:
    workers = config.workers
    cap = os.environ.get("BANDCLT_THREADS")
    if cap:
        workers = min(workers, max(1, int(cap)))
    if any(f.kind == "analytic" for f in config.functions):
        return 1  # closures do not cross process boundaries
    return min(workers, config.replicates)


def _collect(config: ExperimentConfig):
    """All replicate rows, in replicate order regardless of scheduling."""
    N = config.replicates
    workers = _effective_workers(config)
    rows: list = [None] * N
    if workers == 1:
        for r in range(N):
            rows[r] = _replicate_values(config, r)
    else:
        done = 0
        try:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for r, values, norm in pool.map(_replicate_values,
                                                [config] * N, range(N),
                                                chunksize=max(1, N // (4 * workers))):
                    rows[r] = (r, values, norm)
                    done += 1
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise PartialRunError(done, f"worker failed: {exc}") from exc
    return rows


def _theory_for(config: ExperimentConfig, f_i: TestFunction,
                f_j: TestFunction):
    # zero-topology specs carry a nu=0 profile, so this is the nu-limit
    # matching the ensemble geometry
    params = KernelParams(profile=config.spec.profile,
                          nu=config.spec.profile.nu)
    if f_i.kind == "monomial" and f_j.kind == "monomial":
        return limiting_covariance_series(f_i, f_j, params)
    return limiting_covariance(f_i, f_j, params)


def normality_diagnostics(samples) -> dict:
    """Gaussianity diagnostics of a complex sample.

    Skewness and excess kurtosis of the real and imaginary parts,
    their covariance and correlation, the variance ratio, and a
    Jarque-Bera statistic per part.
    """
    from scipy import stats as sstats

    x = np.asarray(samples, dtype=np.complex128)
    if len(x) < 50:
        raise ExperimentError("diagnostics need at least 50 samples")
    out = {}
    re, im = x.real, x.imag
    for name, part in (("re", re), ("im", im)):
        if np.var(part) == 0.0:
            raise ExperimentError(f"zero variance in {name} part")
        skew = float(sstats.skew(part))
        kurt = float(sstats.kurtosis(part))
        out[f"skewness_{name}"] = skew
        out[f"excess_kurtosis_{name}"] = kurt
        out[f"jarque_bera_{name}"] = len(part) / 6.0 * (skew**2 + kurt**2 / 4.0)
    cov = float(np.mean((re - re.mean()) * (im - im.mean())))
    out["cov_re_im"] = cov
    out["corr_re_im"] = cov / float(np.std(re) * np.std(im))
    out["variance_ratio"] = float(np.var(re) / np.var(im))
    return out


def run(config: ExperimentConfig) -> ExperimentReport:
    """Run the full Monte Carlo experiment and aggregate the report."""
    rows = _collect(config)
    N = config.replicates
    k = len(config.functions)
    x = np.empty((N, k), dtype=np.complex128)
    for r, values, _ in rows:
        x[r] = values
    norms = [row[2] for row in rows] if config.compute_norms else None

    means = x.mean(axis=0)
    centered = x - means
    stats = []
    for j, f in enumerate(config.functions):
        var = float(np.sum(np.abs(centered[:, j]) ** 2)) / (N - 1)
        pvar = complex(np.sum(centered[:, j] ** 2)) / (N - 1)
        tv = _theory_for(config, f, f)
        sigma2 = tv.real_value
        # Var(sample variance) ~ sigma^4 (kappa - 1)/N with kappa = 2 for
        # the circular complex Gaussian limit
        z = (var - sigma2) / (sigma2 / np.sqrt(N)) if sigma2 > 0 else np.inf
        diags = normality_diagnostics(x[:, j]) if N >= 50 else None
        stats.append(FunctionStats(
            label=f.label, mean=complex(means[j]), variance=var,
            pseudo_variance=pvar, theory_value=sigma2,
            theory_method=tv.method,
            theory_trunc_error=float(tv.trunc_error),
            z_score=float(z), diagnostics=diags))

    cross = []
    for i in range(k):
        for j in range(i + 1, k):
            cov = complex(np.sum(centered[:, i] * np.conj(centered[:, j]))) / (N - 1)
            tv = _theory_for(config, config.functions[i], config.functions[j])
            cross.append({
                "pair": [config.functions[i].label, config.functions[j].label],
                "covariance_re": cov.real, "covariance_im": cov.imag,
                "theory_value": tv.real_value,
                "theory_method": tv.method,
            })

    exceed = count = None
    if norms is not None:
        count = len(norms)
        exceed = int(sum(1 for s in norms if s > config.rho_check))

    return ExperimentReport(config=config.to_dict(), stats=tuple(stats),
                            cross=tuple(cross), norm_exceed_count=exceed,
                            norm_total=count, replicates=N, seed=config.seed,
                            timestamp=time.time())


def heatmap_data(config: ExperimentConfig):
    """Raw complex samples (one row per replicate per function) plus
    marginal quantile summaries, for external plotting."""
    rows = _collect(config)
    table = []
    per_function: dict[str, list[complex]] = {f.label: []
                                              for f in config.functions}
    for r, values, _ in rows:
        for f, v in zip(config.functions, values):
            table.append((r, f.label, float(np.real(v)), float(np.imag(v))))
            per_function[f.label].append(complex(v))
    qs = [0.05, 0.25, 0.5, 0.75, 0.95]
    quantiles = {}
    for label, vals in per_function.items():
        arr = np.asarray(vals)
        quantiles[label] = {
            "re": [float(q) for q in np.quantile(arr.real, qs)],
            "im": [float(q) for q in np.quantile(arr.imag, qs)],
            "levels": qs,
        }
    return table, quantiles


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(report: ExperimentReport, path) -> None:
    atomic_write_text(path, json.dumps(report.to_dict(), indent=2) + "\n")


def write_samples_csv(table, path) -> None:
    lines = ["replicate,function,re,im"]
    for r, label, re, im in table:
        lines.append(f"{r},{label},{re!r},{im!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")
