"""
Experiment configuration and the moments -> factorize -> biorth -> christoffel
[-> toda] pipelines behind the command line.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blockmat import DEFAULT_TOL, gauss_borel_factorize
from .christoffel import christoffel_transform, connection_matrices
from .errors import ConfigError
from .matpoly import MatrixPolynomial, jordan_chains
from .measures import MatrixMeasure, moment_matrix, moments, quadrature_moments
from .presets import (
    PresetRun, Report, _connection_checks, _compare_with_direct, _kernel_identities, _perturbed_cd,
    system_for, transformed_system,
)
from .toda import TodaTimes, christoffel_flow_check, evolve_measure, h_series, lax_defect, toda_residual

DEFAULT_TOLERANCES = {
    "round_trip": 1e-10,
    "symmetry": 1e-12,
    "moments": 1e-12,
    "orthogonality": 1e-8,
    "kernel": 1e-9,
    "transform_P": 1e-6,
    "transform_H": 1e-8,
    "connection": 1e-8,
    "perturbed_cd": 1e-9,
    "toda": 1e-5,
    "lax": 1e-9,
    "flow": 1e-7,
}


def parse_degrees(spec) -> tuple[int, int]:
    """``"a..b"``, ``[a, b]`` or a single integer b (meaning 0..b)."""
    if isinstance(spec, int):
        return 0, spec
    if isinstance(spec, (list, tuple)) and len(spec) == 2:
        a, b = int(spec[0]), int(spec[1])
    elif isinstance(spec, str) and re.fullmatch(r"\s*\d+\s*\.\.\s*\d+\s*", spec):
        a, b = (int(v) for v in spec.split(".."))
    else:
        raise ConfigError(f"degree range must look like 'a..b', got {spec!r}")
    if a > b:
        raise ConfigError(f"empty degree range {a}..{b}")
    return a, b


def _times(d: dict, p: int) -> TodaTimes:
    try:
        t1 = np.asarray(d.get("t1", [[0.0]]), dtype=float)
        t2 = np.asarray(d.get("t2", [[0.0]]), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad Toda times: {exc}") from exc
    for t in (t1, t2):
        if t.ndim != 2 or t.shape[1] not in (1, p):
            raise ConfigError(f"Toda times need shape (J+1, {p}) or (J+1, 1), got {t.shape}")
    return TodaTimes(np.broadcast_to(t1, (t1.shape[0], p)), np.broadcast_to(t2, (t2.shape[0], p)))


@dataclass
class ExperimentConfig:
    """Validated experiment description."""

    measure: MatrixMeasure
    perturbation: MatrixPolynomial | None = None
    degrees: tuple[int, int] = (0, 5)
    gram: str = "monomial"
    toda: dict | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    factor_tol: float = DEFAULT_TOL
    seed: int = 0
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict, tol: float | None = None, seed: int | None = None,
                  degrees=None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        if "measure" not in d:
            raise ConfigError("config needs a 'measure' section")
        try:
            measure = MatrixMeasure.from_dict(d["measure"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        pert = None
        if d.get("perturbation"):
            try:
                coeffs = [np.array(c, dtype=float) for c in d["perturbation"]["coeffs"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad perturbation: {exc}") from exc
            if not coeffs or any(c.shape != (measure.p, measure.p) for c in coeffs):
                raise ConfigError(f"perturbation coefficients must all be {measure.p}x{measure.p}")
            pert = MatrixPolynomial(coeffs)
        gram = d.get("gram", "monomial")
        if gram not in ("monomial", "orthogonal"):
            raise ConfigError(f"gram must be 'monomial' or 'orthogonal', got {gram!r}")
        tols = dict(DEFAULT_TOLERANCES)
        unknown = set(d.get("tolerances", {})) - set(tols)
        if unknown:
            raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")
        tols.update({k: float(v) for k, v in d.get("tolerances", {}).items()})
        toda = d.get("toda")
        if toda is not None:
            if not isinstance(toda, dict) or not toda.get("grid"):
                raise ConfigError("the 'toda' section needs a non-empty 'grid'")
            toda = dict(toda)
            toda["grid"] = [_times(t, measure.p) for t in toda["grid"]]
        return cls(
            measure=measure,
            perturbation=pert,
            degrees=parse_degrees(degrees if degrees is not None else d.get("degrees", "0..5")),
            gram=gram,
            toda=toda,
            tolerances=tols,
            factor_tol=float(tol if tol is not None else d.get("factor_tol", DEFAULT_TOL)),
            seed=int(seed if seed is not None else d.get("seed", 0)),
            params=dict(d.get("params", {})),
        )

    @classmethod
    def from_json(cls, path, **overrides) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data, **overrides)


def _base_report(name: str, cfg: ExperimentConfig) -> Report:
    return Report(name, {"measure": cfg.measure.to_dict(), "degrees": list(cfg.degrees),
                         "gram": cfg.gram, "seed": cfg.seed, "factor_tol": cfg.factor_tol})


def run_moments(cfg: ExperimentConfig) -> PresetRun:
    """Closed-form moments against Gauss quadrature, plus the block Hankel truncation."""
    n = cfg.degrees[1] + 1
    report = _base_report("moments", cfg)
    closed = moments(cfg.measure, 2 * n - 1)
    quad = quadrature_moments(cfg.measure, 2 * n - 1)
    worst = max(float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a)))) for a, b in zip(closed, quad))
    report.check("closed form vs quadrature moments", worst, cfg.tolerances["moments"])
    M = moment_matrix(cfg.measure, n)
    report.check("block Hankel structure", 0.0 if M.is_block_hankel() else 1.0, 0.0)
    artifacts = {
        "moments.json": {"measure": cfg.measure.to_dict(), "moments": closed, "n_blocks": n},
        "moment_matrix.csv": M.to_csv(),
    }
    return PresetRun(report, artifacts)


def run_factor(cfg: ExperimentConfig) -> PresetRun:
    n = cfg.degrees[1] + 1
    report = _base_report("factor", cfg)
    M = moment_matrix(cfg.measure, n)
    fact = gauss_borel_factorize(M, cfg.factor_tol)
    rt = np.linalg.norm(fact.reconstruct().data - M.data) / np.linalg.norm(M.data)
    report.check("round trip |S1^-1 H S2^-T - M| / |M|", rt, cfg.tolerances["round_trip"])
    if fact.symmetric:
        report.check("S1 = S2", float(np.max(np.abs(fact.S1.data - fact.S2.data))), cfg.tolerances["symmetry"])
    artifacts = {"factorization.json": {"p": fact.p, "n": fact.n, "symmetric": fact.symmetric,
                                        "S1": fact.S1.data, "S2": fact.S2.data, "H": fact.H}}
    return PresetRun(report, artifacts)


def run_biorth(cfg: ExperimentConfig) -> PresetRun:
    from .measures import inner_product

    n_max = cfg.degrees[1]
    report = _base_report("biorth", cfg)
    system = system_for(cfg.measure, n_max + 1, cfg.factor_tol, cfg.gram)
    hmax = max(float(np.max(np.abs(h))) for h in system.H)
    worst = 0.0
    for n in range(n_max + 1):
        for m in range(n_max + 1):
            G = inner_product(cfg.measure, system.P1[n], system.P2[m])
            target = system.H[n] if n == m else 0.0
            worst = max(worst, float(np.max(np.abs(G - target))))
    report.check("bi-orthogonality by quadrature / max H", worst / hmax, cfg.tolerances["orthogonality"])
    rng = np.random.default_rng(cfg.seed)
    vals = _kernel_identities(cfg.measure, cfg.gram, n_max, n_max, int(cfg.params.get("points", 20)),
                              cfg.factor_tol, rng)
    for key, v in vals.items():
        report.check(key, v, cfg.tolerances["kernel"])
    trimmed = {**system.to_dict(), "n_max": n_max}
    trimmed["P1"], trimmed["P2"], trimmed["H"] = (trimmed[k][:n_max + 1] for k in ("P1", "P2", "H"))
    return PresetRun(report, {"system.json": {"measure": cfg.measure.to_dict(), "system": trimmed}})


def run_christoffel(cfg: ExperimentConfig) -> PresetRun:
    """Spectral Christoffel formula, compared with direct factorization of the perturbed moments."""
    if cfg.perturbation is None:
        raise ConfigError("the christoffel pipeline needs a 'perturbation'")
    W = cfg.perturbation.trim()
    N = W.degree
    a, b = cfg.degrees
    report = _base_report("christoffel", cfg)
    base = system_for(cfg.measure, b + N + 1, cfg.factor_tol, cfg.gram)
    direct = system_for(cfg.measure, b, cfg.factor_tol, cfg.gram, W=W)
    spec = jordan_chains(W)
    results = [christoffel_transform(base, W, spec, k) for k in range(a, b + 1)]
    _compare_with_direct(report, results, direct, cfg.tolerances["transform_P"], cfg.tolerances["transform_H"])
    conn = connection_matrices(base, direct, W)
    _connection_checks(report, conn, cfg.tolerances["connection"])
    rng = np.random.default_rng(cfg.seed)
    _perturbed_cd(report, base, direct, conn, rng, cfg.measure.support, range(b + 1),
                  int(cfg.params.get("points", 20)), cfg.tolerances["perturbed_cd"])
    pert = transformed_system(results)
    pert["perturbation"] = {"coeffs": W.coeffs}
    pert["spectrum"] = spec.to_dict()
    pert["connection"] = conn.to_dict()
    artifacts = {
        "system.json": {"measure": cfg.measure.to_dict(), "system": base.to_dict()},
        "perturbed_system.json": pert,
        "connection.json": conn.to_dict(),
    }
    return PresetRun(report, artifacts)


def run_toda(cfg: ExperimentConfig) -> PresetRun:
    """Toda residuals and Lax defect on the grid, H_k series, optional flowed Christoffel checks."""
    if cfg.toda is None:
        raise ConfigError("the toda pipeline needs a 'toda' section")
    grid = cfg.toda["grid"]
    ks = [int(k) for k in cfg.toda.get("k", [1, 2])]
    h = float(cfg.toda.get("h", 1e-3))
    report = _base_report("toda", cfg)
    rows = []
    worst, worst_lax = 0.0, 0.0
    for i, times in enumerate(grid):
        for k in ks:
            r = toda_residual(cfg.measure, times, k, h)
            worst = max(worst, r.multicomponent, r.non_abelian)
            rows.append({"grid_point": i, **r.to_dict()})
        if cfg.measure.is_symmetric():
            state = evolve_measure(cfg.measure, times, max(ks) + 4)
            worst_lax = max(worst_lax, lax_defect(state, max(ks) + 1))
    report.check("Toda residual", worst, cfg.tolerances["toda"])
    if cfg.measure.is_symmetric():
        report.check("Hankel Lax defect |L1 - L2|", worst_lax, cfg.tolerances["lax"])
    report.tables["toda"] = rows
    if cfg.perturbation is not None:
        flow = christoffel_flow_check(cfg.measure, cfg.perturbation, grid, n_blocks=max(ks) + 2)
        report.tables["flow"] = flow
        ok = all(r.get("ok") for r in flow)
        report.check("flowed systems factorized at every grid point", 0.0 if ok else 1.0, 0.0)
        if ok:
            report.check("flowed relation Hhat omega2 = omega1 H", max(r["relation"] for r in flow),
                         cfg.tolerances["flow"])
    series = h_series(cfg.measure, grid, list(range(max(ks) + 1)))
    return PresetRun(report, {}, series)


PIPELINES = {
    "moments": run_moments,
    "factor": run_factor,
    "biorth": run_biorth,
    "christoffel": run_christoffel,
    "toda": run_toda,
}


def load_params(path: str | Path | None) -> dict:
    """Preset parameters: the 'params' section of a config file, or the whole file."""
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return dict(data.get("params", data))
