"""Centralized tolerances, scan grids, and run-configuration parsing.

All numeric thresholds used across the library live in Tolerances so tests,
the CLI and the acceptance suite share one set of defaults.  Run
configurations are JSON files; unknown keys are rejected with their full path
so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

from .errors import ConfigError
from .params import FluidParams, Sector

__all__ = [
    "Tolerances",
    "GridSpec",
    "ClassGridSpec",
    "RunConfig",
    "load_config",
    "default_config",
    "mutation_from_env",
    "REFERENCE_PARAMS",
    "STRESS_PARAM_SETS",
]


def mutation_from_env() -> tuple[str, float] | None:
    """Deliberate-defect hook, read from LOPSTOKES_MUTATE="target[:rel]".

    Perturbs one named quantity (a boundary-matrix entry or a solution
    amplitude) by the factor (1 + rel); rel defaults to -2.0, a sign flip.
    The hook exists so the certification suite can demonstrate that it is
    able to fail; it must never be set in production runs.
    """
    spec = os.environ.get("LOPSTOKES_MUTATE", "").strip()
    if not spec:
        return None
    target, _, rel = spec.partition(":")
    try:
        factor = float(rel) if rel else -2.0
    except ValueError as exc:
        raise ConfigError(f"LOPSTOKES_MUTATE rel part {rel!r} is not a number") from exc
    return target.strip(), factor

# Reference parameter set used by scans and the acceptance suite: distinct
# unit-scale densities, unit viscosities, unit surface tension.
REFERENCE_PARAMS = FluidParams(
    rho_plus=1.0, rho_minus=2.0, mu_plus=1.0, mu_minus=1.0, nu_plus=1.0, sigma=1.0
)

# Stress sets: extreme viscosity/density ratios and the sigma edge cases.
STRESS_PARAM_SETS: tuple[FluidParams, ...] = (
    FluidParams(1.0, 2.0, 1e-3, 1.0, 1e-3, 1.0),
    FluidParams(1.0, 2.0, 1e3, 1.0, 1e3, 1.0),
    FluidParams(1.0, 2.0, 1.0, 1e-3, 1.0, 1.0),
    FluidParams(1.0, 2.0, 1.0, 1e3, 1.0, 1.0),
    FluidParams(1e-3, 1.0, 1.0, 1.0, 1.0, 1.0),
    FluidParams(1e3, 1.0, 1.0, 1.0, 1.0, 1.0),
    FluidParams(1.0, 2.0, 1.0, 1.0, 1e3, 0.0),
    FluidParams(2.0, 1.0, 0.5, 2.0, 3.0, 10.0),
)


@dataclass(frozen=True)
class Tolerances:
    """Every default threshold in one record.

    scale() multiplies the acceptance-style residual thresholds (not the
    internal algorithm switches) by a factor, for the CLI --tolerance-scale.
    """

    # symbol algebra
    resquare: float = 1e-14
    root_scaling: float = 1e-13
    confluent_switch: float = 1e-4      # |b-a| < switch*|b+a| -> series kernel
    series_term: float = 1e-16          # relative truncation of the series
    kernel_continuity: float = 1e-12

    # boundary matrix
    raw_vs_stable: float = 1e-10
    cancellation_safe: float = 1e-11
    det_factorization: float = 1e-13
    det_vs_direct: float = 1e-12
    adjugate_identity: float = 1e-12
    entry_homogeneity: float = 1e-12
    det_ratio_floor: float = 1e-14      # SingularDetL below floor*(\sqrt{|lam|}+A)^4
    omega_refine_drift: float = 0.05
    asym_dev_at_100: float = 0.05
    asym_dev_at_1e4: float = 0.005

    # coefficients / height symbol
    beta_residual: float = 1e-12
    beta_jump: float = 1e-13
    coeff_vs_direct: float = 1e-11
    height_floor: float = 1e-3          # find_lambda0 acceptance level
    height_inv_rel: float = 1e-10       # HeightNotInvertible below rel*(|lam|+A)
    slope_dev: float = 0.05

    # multiplier classes
    class_drift: float = 2.0
    fd_step_rel: float = 1e-4
    noise_gate: float = 10.0

    # resolvent
    ode_residual: float = 1e-10
    interface_residual: float = 1e-11
    fuzz_residual: float = 1e-10
    energy_defect: float = 1e-10
    quadrature_cross: float = 1e-8
    mutation_floor: float = 1e-4

    # physical layer
    fft_roundtrip: float = 1e-13
    single_mode: float = 1e-12
    volevich: float = 1e-8
    volevich_quad_rel: float = 1e-9
    lions_resub: float = 1e-13
    extension_c3: float = 1e-9
    envelope_drift: float = 2.0
    zero_mode: float = 1e-12

    def scale(self, factor: float) -> "Tolerances":
        if factor <= 0 or not math.isfinite(factor):
            raise ConfigError(f"tolerance scale must be positive, got {factor!r}")
        scaled = {
            name: getattr(self, name) * factor
            for name in (
                "resquare", "root_scaling", "kernel_continuity", "raw_vs_stable",
                "cancellation_safe", "det_factorization", "det_vs_direct",
                "adjugate_identity", "entry_homogeneity", "beta_residual",
                "beta_jump", "coeff_vs_direct", "ode_residual", "interface_residual",
                "fuzz_residual", "energy_defect", "quadrature_cross",
                "fft_roundtrip", "single_mode", "volevich", "lions_resub",
                "extension_c3", "asym_dev_at_100", "asym_dev_at_1e4",
            )
        }
        return replace(self, **scaled)


@dataclass(frozen=True)
class GridSpec:
    """Log-magnitude x angle x log-magnitude scan grid.

    |lambda| runs log-spaced [lam_min, lam_max] at lam_per_decade points per
    decade; arg(lambda) takes n_angles values evenly spaced on
    [-(pi-eps), pi-eps] (odd n_angles keeps 0 and the half/extreme rays on the
    grid); A runs log-spaced [a_min, a_max] likewise.
    """

    lam_min: float = 1e-4
    lam_max: float = 1e8
    lam_per_decade: int = 10
    n_angles: int = 13
    a_min: float = 1e-4
    a_max: float = 1e8
    a_per_decade: int = 10

    def __post_init__(self) -> None:
        if self.lam_min <= 0 or self.lam_max <= self.lam_min:
            raise ConfigError("grid lambda range must satisfy 0 < lam_min < lam_max")
        if self.a_min <= 0 or self.a_max <= self.a_min:
            raise ConfigError("grid A range must satisfy 0 < a_min < a_max")
        if self.lam_per_decade < 1 or self.a_per_decade < 1 or self.n_angles < 3:
            raise ConfigError("grid density too low (need >=1/decade and >=3 angles)")

    def lam_mags(self) -> np.ndarray:
        decades = math.log10(self.lam_max / self.lam_min)
        n = int(round(decades * self.lam_per_decade)) + 1
        return np.logspace(math.log10(self.lam_min), math.log10(self.lam_max), n)

    def a_vals(self) -> np.ndarray:
        decades = math.log10(self.a_max / self.a_min)
        n = int(round(decades * self.a_per_decade)) + 1
        return np.logspace(math.log10(self.a_min), math.log10(self.a_max), n)

    def angles(self, epsilon: float) -> np.ndarray:
        span = math.pi - epsilon
        return np.linspace(-span, span, self.n_angles)

    def refined(self) -> "GridSpec":
        """Double the per-decade density (same ranges, same angle count + 12)."""
        return replace(
            self,
            lam_per_decade=2 * self.lam_per_decade,
            a_per_decade=2 * self.a_per_decade,
            n_angles=self.n_angles + 12,
        )

    def points(self, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (lam, a) arrays in deterministic order (mag, angle, a)."""
        mags = self.lam_mags()
        angs = self.angles(epsilon)
        avals = self.a_vals()
        lam = (mags[:, None] * np.exp(1j * angs)[None, :]).reshape(-1)
        lam_full = np.repeat(lam, avals.size)
        a_full = np.tile(avals, lam.size)
        return lam_full, a_full


@dataclass(frozen=True)
class ClassGridSpec:
    """Grid for multiplier-class estimation (dim-3 frequencies, two directions).

    Kept smaller than the scan grid: every point costs a full finite-difference
    stencil.  refined() doubles density and widens both ranges a decade per
    side, which is what exposes wrong-degree claims.
    """

    lam_min: float = 1e-4
    lam_max: float = 1e6
    lam_per_decade: int = 3
    n_angles: int = 7
    a_min: float = 1e-4
    a_max: float = 1e4
    a_per_decade: int = 3

    def lam_mags(self) -> np.ndarray:
        decades = math.log10(self.lam_max / self.lam_min)
        n = int(round(decades * self.lam_per_decade)) + 1
        return np.logspace(math.log10(self.lam_min), math.log10(self.lam_max), n)

    def a_vals(self) -> np.ndarray:
        decades = math.log10(self.a_max / self.a_min)
        n = int(round(decades * self.a_per_decade)) + 1
        return np.logspace(math.log10(self.a_min), math.log10(self.a_max), n)

    def angles(self, epsilon: float) -> np.ndarray:
        span = math.pi - epsilon
        return np.linspace(-span, span, self.n_angles)

    def refined(self) -> "ClassGridSpec":
        return ClassGridSpec(
            lam_min=self.lam_min / 10.0,
            lam_max=self.lam_max * 10.0,
            lam_per_decade=2 * self.lam_per_decade,
            n_angles=self.n_angles,
            a_min=self.a_min / 10.0,
            a_max=self.a_max * 10.0,
            a_per_decade=2 * self.a_per_decade,
        )


_DIRECTIONS = ((1.0, 0.0), (0.6, 0.8))


@dataclass(frozen=True)
class RunConfig:
    fluid: FluidParams = REFERENCE_PARAMS
    sector: Sector = Sector(epsilon=math.pi / 4)
    grid: GridSpec = GridSpec()
    class_grid: ClassGridSpec = ClassGridSpec()
    tolerances: Tolerances = Tolerances()
    seed: int = 20260817
    samples: int = 10000
    out_dir: str = "reports"
    threads: int = 0                      # 0 = leave the pool alone
    solve: dict = field(default_factory=dict)


_FLUID_KEYS = {"rho_plus", "rho_minus", "mu_plus", "mu_minus", "nu_plus", "sigma"}
_SECTOR_KEYS = {"epsilon", "lambda_floor"}
_GRID_KEYS = {"lam_min", "lam_max", "lam_per_decade", "n_angles", "a_min", "a_max", "a_per_decade"}
_SOLVE_KEYS = {"lambda_re", "lambda_im", "mode", "x_levels", "box", "shape", "data"}
_TOP_KEYS = {"fluid", "sector", "grid", "class_grid", "seed", "samples", "out_dir", "threads", "solve"}


def _require_mapping(obj: Any, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _check_keys(obj: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def _number(obj: dict, key: str, path: str, default: float, integer: bool = False):
    if key not in obj:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    if integer:
        if float(v) != int(v):
            raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def default_config() -> RunConfig:
    return RunConfig()


def parse_config(doc: dict, base: RunConfig | None = None) -> RunConfig:
    """Build a RunConfig from a parsed JSON document, rejecting unknown keys."""
    base = base or default_config()
    doc = _require_mapping(doc, "config")
    _check_keys(doc, _TOP_KEYS, "config")

    fluid = base.fluid
    if "fluid" in doc:
        sub = _require_mapping(doc["fluid"], "config.fluid")
        _check_keys(sub, _FLUID_KEYS, "config.fluid")
        fluid = FluidParams(
            rho_plus=_number(sub, "rho_plus", "config.fluid", base.fluid.rho_plus),
            rho_minus=_number(sub, "rho_minus", "config.fluid", base.fluid.rho_minus),
            mu_plus=_number(sub, "mu_plus", "config.fluid", base.fluid.mu_plus),
            mu_minus=_number(sub, "mu_minus", "config.fluid", base.fluid.mu_minus),
            nu_plus=_number(sub, "nu_plus", "config.fluid", base.fluid.nu_plus),
            sigma=_number(sub, "sigma", "config.fluid", base.fluid.sigma),
        )

    sector = base.sector
    if "sector" in doc:
        sub = _require_mapping(doc["sector"], "config.sector")
        _check_keys(sub, _SECTOR_KEYS, "config.sector")
        sector = Sector(
            epsilon=_number(sub, "epsilon", "config.sector", base.sector.epsilon),
            lambda_floor=_number(sub, "lambda_floor", "config.sector", base.sector.lambda_floor),
        )

    def grid_of(key: str, cls, current):
        if key not in doc:
            return current
        sub = _require_mapping(doc[key], f"config.{key}")
        _check_keys(sub, _GRID_KEYS, f"config.{key}")
        kw = {}
        for f in fields(cls):
            kw[f.name] = _number(
                sub, f.name, f"config.{key}", getattr(current, f.name),
                integer=f.name.endswith("per_decade") or f.name == "n_angles",
            )
        return cls(**kw)

    grid = grid_of("grid", GridSpec, base.grid)
    class_grid = grid_of("class_grid", ClassGridSpec, base.class_grid)

    solve = base.solve
    if "solve" in doc:
        sub = _require_mapping(doc["solve"], "config.solve")
        _check_keys(sub, _SOLVE_KEYS, "config.solve")
        solve = dict(sub)

    seed = _number(doc, "seed", "config", base.seed, integer=True)
    samples = _number(doc, "samples", "config", base.samples, integer=True)
    threads = _number(doc, "threads", "config", base.threads, integer=True)
    if seed < 0 or seed >= 2**64:
        raise ConfigError(f"config.seed: must fit in an unsigned 64-bit value, got {seed}")
    if samples < 1:
        raise ConfigError(f"config.samples: must be >= 1, got {samples}")
    out_dir = doc.get("out_dir", base.out_dir)
    if not isinstance(out_dir, str):
        raise ConfigError(f"config.out_dir: expected a string, got {out_dir!r}")

    return RunConfig(
        fluid=fluid, sector=sector, grid=grid, class_grid=class_grid,
        tolerances=base.tolerances, seed=seed, samples=samples,
        out_dir=out_dir, threads=threads, solve=solve,
    )


def load_config(path: str, base: RunConfig | None = None) -> RunConfig:
    """Parse a JSON run configuration; errors carry line/column diagnostics."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return parse_config(doc, base=base)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_document(cfg: RunConfig) -> dict:
    """Canonical JSON-ready document for hashing and report headers."""
    return {
        "fluid": {
            "rho_plus": cfg.fluid.rho_plus, "rho_minus": cfg.fluid.rho_minus,
            "mu_plus": cfg.fluid.mu_plus, "mu_minus": cfg.fluid.mu_minus,
            "nu_plus": cfg.fluid.nu_plus, "sigma": cfg.fluid.sigma,
        },
        "sector": {"epsilon": cfg.sector.epsilon, "lambda_floor": cfg.sector.lambda_floor},
        "grid": {f.name: getattr(cfg.grid, f.name) for f in fields(GridSpec)},
        "class_grid": {f.name: getattr(cfg.class_grid, f.name) for f in fields(ClassGridSpec)},
        "seed": cfg.seed,
        "samples": cfg.samples,
        "solve": cfg.solve,
    }
