"""Run configuration, experiment drivers, and structured CSV/JSON output.

A run is described by a flat key-value config document.  Defaults reproduce
the reference charging setup: five ions at the stated trap positions coupled
to a 101-level boson mode prepared in sqrt(0.6)|10> + sqrt(0.4)|15>, with
omega_a = omega_c = 1, lambda = 0.25, J = 0.2, p = 3, sampled over t in
[0, 40] at dt = 0.02.

Drivers:
  * run_evolution: one trajectory, all observables per sample.
  * run_max_scan: sweep one parameter, record window maxima of E_c and E_e.
  * run_spectrum_scan: sweep J, record the spin spectrum plus M_z and O_z.
  * run_trace_sweep: sweep with a full trajectory kept per grid point.

Every CSV gets a JSON sidecar holding the full config echo, so any output
is reproducible from the sidecar alone.  Identical configs produce
bit-identical files: fixed grids, deterministic solvers, no timestamps.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import importlib.metadata
import json
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .dynamics import (DEFAULT_KRYLOV_DIM, DEFAULT_TOL, DENSE_DEFAULT_MAX_DIM,
                       EvolutionTrace, SpectrumScan, ground_state,
                       initial_state, propagate, spectrum_scan)
from .errors import ConfigError, NumericalConsistencyError
from .hilbert import HilbertSpec
from .model import (COUPLING_MODES, DEFAULT_POSITIONS, HOPPING_MODES,
                    ModelParams, build_hamiltonian, excitation_diagonal,
                    parity_diagonal)
from .observables import (ERGOTROPY_CLAMP, ion_energy, leakage,
                          partial_trace, passive_energy, site_populations,
                          von_neumann_entropy)

LEAKAGE_WARN = 1e-6

DEFAULT_BOSON_LEVELS = (10, 15)
DEFAULT_BOSON_WEIGHTS = (0.6, 0.4)
DEFAULT_T_MAX = 40.0
DEFAULT_DT_SAMPLE = 0.02
DEFAULT_WINDOW_T_MAX = 30.0

SWEEP_PARAMS = ("lambda", "j_hop", "p_exp")
SWEEP_REDUCTIONS = ("trace", "max_over_window")
SPECTRUM_MODES = ("config", "both")
METHODS = ("auto", "dense_eig", "krylov")

# config key -> ModelParams field for sweepable parameters
_SWEEP_FIELDS = {"lambda": "coupling", "j_hop": "j_hop", "p_exp": "p_exp"}


def _package_version() -> str:
    try:
        return importlib.metadata.version("ionbattery")
    except importlib.metadata.PackageNotFoundError:
        return "0.1.0"


@dataclass(frozen=True)
class RunConfig:
    """Fully validated description of one run or one sweep."""

    model: ModelParams
    spec: HilbertSpec
    boson_levels: tuple[int, ...] = DEFAULT_BOSON_LEVELS
    boson_weights: tuple[float, ...] = DEFAULT_BOSON_WEIGHTS
    t_max: float = DEFAULT_T_MAX
    dt_sample: float = DEFAULT_DT_SAMPLE
    method: str = "auto"
    tol: float = DEFAULT_TOL
    krylov_dim: int = DEFAULT_KRYLOV_DIM
    workers: int = 1
    window_t_max: float = DEFAULT_WINDOW_T_MAX
    sweep_param: str | None = None
    sweep_grid: tuple[float, ...] = ()
    sweep_reduction: str = "max_over_window"
    spectrum_modes: str = "config"
    out_dir: str = "runs"

    @property
    def is_sweep(self) -> bool:
        return self.sweep_param is not None

    def boson_amps(self) -> dict[int, complex]:
        """Initial boson amplitudes: real positive square roots of the weights."""
        return {level: complex(np.sqrt(w))
                for level, w in zip(self.boson_levels, self.boson_weights)}

    def sample_times(self) -> np.ndarray:
        n_steps = int(round(self.t_max / self.dt_sample))
        return np.linspace(0.0, self.t_max, n_steps + 1)

    def effective_method(self) -> str:
        if self.method != "auto":
            return self.method
        if self.spec.total_dim <= DENSE_DEFAULT_MAX_DIM:
            return "dense_eig"
        return "krylov"


def default_config() -> RunConfig:
    return parse_config("")


# ---------------------------------------------------------------------------
# Parsing: flat key-value text -> RunConfig

def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}", key=key) from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}", key=key) from None


def _parse_float_list(key: str, raw: str) -> tuple[float, ...]:
    items = [s for s in (part.strip() for part in raw.split(",")) if s]
    if not items:
        raise ConfigError(f"{key}: expected a comma-separated list", key=key)
    return tuple(_parse_float(key, s) for s in items)


def _parse_int_list(key: str, raw: str) -> tuple[int, ...]:
    items = [s for s in (part.strip() for part in raw.split(",")) if s]
    if not items:
        raise ConfigError(f"{key}: expected a comma-separated list", key=key)
    return tuple(_parse_int(key, s) for s in items)


def _parse_choice(key: str, raw: str, choices: Sequence[str]) -> str:
    if raw not in choices:
        raise ConfigError(f"{key}: expected one of {choices}, got {raw!r}", key=key)
    return raw


_CONFIG_KEYS = ("n_ions", "fock_dim", "omega_a", "omega_c", "lambda", "j_hop",
                "p_exp", "positions", "coupling_mode", "hopping_mode",
                "boson_levels", "boson_weights", "t_max", "dt_sample",
                "method", "tol", "krylov_dim", "workers", "window_t_max",
                "sweep_param", "sweep_grid", "sweep_reduction",
                "spectrum_modes", "out_dir")


def parse_pairs(text: str) -> dict[str, str]:
    """Split a flat key-value document into raw string pairs.

    One `key = value` per line; `#` starts a comment; blank lines ignored.
    Unknown or duplicate keys are errors.
    """
    pairs: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {raw_line.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}", key=key)
        if key in pairs:
            raise ConfigError(f"duplicate config key {key!r}", key=key)
        pairs[key] = value
    return pairs


def config_from_mapping(pairs: Mapping[str, str]) -> RunConfig:
    """Assemble and validate a RunConfig from raw string pairs."""
    unknown = set(pairs) - set(_CONFIG_KEYS)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown config key {key!r}", key=key)

    def get(key: str, parse: Callable, default):
        if key in pairs:
            return parse(key, pairs[key])
        return default

    n_ions = get("n_ions", _parse_int, 5)
    fock_dim = get("fock_dim", _parse_int, 101)
    if n_ions < 1:
        raise ConfigError(f"n_ions: must be >= 1, got {n_ions}", key="n_ions")
    if fock_dim < 2:
        raise ConfigError(f"fock_dim: must be >= 2, got {fock_dim}", key="fock_dim")

    if "positions" in pairs:
        positions = _parse_float_list("positions", pairs["positions"])
    elif n_ions == len(DEFAULT_POSITIONS):
        positions = DEFAULT_POSITIONS
    else:
        # fallback unit-spaced chain, centered like the default one
        positions = tuple(float(i) - (n_ions - 1) / 2 for i in range(n_ions))
    if len(positions) != n_ions:
        raise ConfigError(f"positions: expected {n_ions} entries, got "
                          f"{len(positions)}", key="positions")

    p_exp = get("p_exp", _parse_float, 3.0)
    if p_exp < 0:
        raise ConfigError(f"p_exp: hopping decay exponent must be >= 0, "
                          f"got {p_exp!r}", key="p_exp")

    try:
        model = ModelParams(
            omega_a=get("omega_a", _parse_float, 1.0),
            omega_c=get("omega_c", _parse_float, 1.0),
            coupling=get("lambda", _parse_float, 0.25),
            j_hop=get("j_hop", _parse_float, 0.2),
            p_exp=p_exp,
            positions=positions,
            coupling_mode=get("coupling_mode",
                              lambda k, v: _parse_choice(k, v, COUPLING_MODES),
                              "full"),
            hopping_mode=get("hopping_mode",
                             lambda k, v: _parse_choice(k, v, HOPPING_MODES),
                             "full"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"model parameters: {exc}") from exc

    boson_levels = get("boson_levels", _parse_int_list, DEFAULT_BOSON_LEVELS)
    boson_weights = get("boson_weights", _parse_float_list, DEFAULT_BOSON_WEIGHTS)
    if len(boson_levels) != len(boson_weights):
        raise ConfigError("boson_weights: need one weight per level",
                          key="boson_weights")
    if len(set(boson_levels)) != len(boson_levels):
        raise ConfigError("boson_levels: levels must be distinct",
                          key="boson_levels")
    for level in boson_levels:
        if not 0 <= level < fock_dim:
            raise ConfigError(f"boson_levels: level {level} outside "
                              f"[0, {fock_dim - 1}]", key="boson_levels")
    if any(w < 0 for w in boson_weights):
        raise ConfigError("boson_weights: weights must be non-negative",
                          key="boson_weights")
    if abs(sum(boson_weights) - 1.0) > 1e-10:
        raise ConfigError(f"boson_weights: weights sum to "
                          f"{sum(boson_weights)!r}, not 1", key="boson_weights")

    t_max = get("t_max", _parse_float, DEFAULT_T_MAX)
    dt_sample = get("dt_sample", _parse_float, DEFAULT_DT_SAMPLE)
    if t_max <= 0:
        raise ConfigError(f"t_max: must be > 0, got {t_max!r}", key="t_max")
    if not 0 < dt_sample <= t_max:
        raise ConfigError(f"dt_sample: must be in (0, t_max], got "
                          f"{dt_sample!r}", key="dt_sample")

    method = get("method", lambda k, v: v, "auto")
    if method == "dense":          # CLI-friendly synonym
        method = "dense_eig"
    if method not in METHODS:
        raise ConfigError(f"method: expected one of {METHODS} (or 'dense'), "
                          f"got {method!r}", key="method")

    tol = get("tol", _parse_float, DEFAULT_TOL)
    if tol <= 0:
        raise ConfigError(f"tol: must be > 0, got {tol!r}", key="tol")
    krylov_dim = get("krylov_dim", _parse_int, DEFAULT_KRYLOV_DIM)
    if krylov_dim < 3:
        raise ConfigError(f"krylov_dim: must be >= 3, got {krylov_dim}",
                          key="krylov_dim")
    workers = get("workers", _parse_int, 1)
    if workers < 1:
        raise ConfigError(f"workers: must be >= 1, got {workers}", key="workers")

    window_t_max = get("window_t_max", _parse_float,
                       min(DEFAULT_WINDOW_T_MAX, t_max))
    if not 0 < window_t_max <= t_max:
        raise ConfigError(f"window_t_max: must be in (0, t_max], got "
                          f"{window_t_max!r}", key="window_t_max")

    sweep_param = get("sweep_param",
                      lambda k, v: _parse_choice(k, v, SWEEP_PARAMS), None)
    sweep_grid = get("sweep_grid", _parse_float_list, ())
    if sweep_param is not None and not sweep_grid:
        raise ConfigError("sweep_grid: required when sweep_param is set",
                          key="sweep_grid")
    if sweep_param is None and sweep_grid:
        raise ConfigError("sweep_param: required when sweep_grid is set",
                          key="sweep_param")
    if sweep_param == "p_exp" and any(v < 0 for v in sweep_grid):
        raise ConfigError("sweep_grid: p_exp values must be >= 0",
                          key="sweep_grid")

    return RunConfig(
        model=model,
        spec=HilbertSpec(n_ions=n_ions, fock_dim=fock_dim),
        boson_levels=tuple(boson_levels),
        boson_weights=tuple(float(w) for w in boson_weights),
        t_max=t_max,
        dt_sample=dt_sample,
        method=method,
        tol=tol,
        krylov_dim=krylov_dim,
        workers=workers,
        window_t_max=window_t_max,
        sweep_param=sweep_param,
        sweep_grid=tuple(sweep_grid),
        sweep_reduction=get("sweep_reduction",
                            lambda k, v: _parse_choice(k, v, SWEEP_REDUCTIONS),
                            "max_over_window"),
        spectrum_modes=get("spectrum_modes",
                           lambda k, v: _parse_choice(k, v, SPECTRUM_MODES),
                           "config"),
        out_dir=get("out_dir", lambda k, v: v, "runs"),
    )


def parse_config(text: str,
                 overrides: Mapping[str, str] | None = None) -> RunConfig:
    """Parse a flat key-value document, with optional key overrides on top."""
    pairs = parse_pairs(text)
    for key, value in (overrides or {}).items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}", key=key)
        pairs[key] = value
    return config_from_mapping(pairs)


def config_to_mapping(config: RunConfig) -> dict[str, str]:
    """Flat string mapping that config_from_mapping maps back to `config`."""
    m = config.model
    pairs = {
        "n_ions": str(config.spec.n_ions),
        "fock_dim": str(config.spec.fock_dim),
        "omega_a": repr(m.omega_a),
        "omega_c": repr(m.omega_c),
        "lambda": repr(m.coupling),
        "j_hop": repr(m.j_hop),
        "p_exp": repr(m.p_exp),
        "positions": ", ".join(repr(x) for x in m.positions),
        "coupling_mode": m.coupling_mode,
        "hopping_mode": m.hopping_mode,
        "boson_levels": ", ".join(str(v) for v in config.boson_levels),
        "boson_weights": ", ".join(repr(w) for w in config.boson_weights),
        "t_max": repr(config.t_max),
        "dt_sample": repr(config.dt_sample),
        "method": config.method,
        "tol": repr(config.tol),
        "krylov_dim": str(config.krylov_dim),
        "workers": str(config.workers),
        "window_t_max": repr(config.window_t_max),
        "sweep_reduction": config.sweep_reduction,
        "spectrum_modes": config.spectrum_modes,
        "out_dir": config.out_dir,
    }
    if config.sweep_param is not None:
        pairs["sweep_param"] = config.sweep_param
        pairs["sweep_grid"] = ", ".join(repr(v) for v in config.sweep_grid)
    return pairs


def render_config(pairs: Mapping[str, str]) -> str:
    """Inverse of parse_pairs, in canonical key order."""
    lines = [f"{key} = {pairs[key]}" for key in _CONFIG_KEYS if key in pairs]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Core evaluation

def _sweep_point_model(config: RunConfig, value: float) -> ModelParams:
    field = _SWEEP_FIELDS[config.sweep_param]
    return dataclasses.replace(config.model, **{field: float(value)})


def evaluate_trace(config: RunConfig) -> tuple[EvolutionTrace, dict]:
    """Run one trajectory and evaluate every per-sample observable.

    Returns the trace plus a summary dict (ground-state data, extrema).
    Pure computation; no files are written.
    """
    spec = config.spec
    ham = build_hamiltonian(config.model, spec)
    e0, ground, degenerate = ground_state(ham.h_spin)
    psi0 = initial_state(spec, config.boson_amps(), ground)
    times = config.sample_times()
    n = times.size

    energy = np.empty(n)
    ergo = np.empty(n)
    entropy = np.empty(n)
    sigma = np.empty((n, spec.n_ions))
    n_exc = np.empty(n)
    parity = np.empty(n)
    leak = np.empty(n)
    norm_error = np.empty(n)
    energy_drift = np.empty(n)

    exc_diag = excitation_diagonal(spec)
    par_diag = parity_diagonal(spec)
    e_total_0 = 0.0
    raw_min = np.inf

    stream = propagate(ham.h_total, psi0, times,
                       method=config.effective_method(),
                       tol=config.tol, krylov_dim=config.krylov_dim)
    for k, psi in enumerate(stream):
        prob = np.abs(psi.amplitudes) ** 2
        rho_a = partial_trace(psi, spec, "ions")
        energy[k] = ion_energy(rho_a, ham.h_spin)
        raw = energy[k] - passive_energy(rho_a, ham.h_spin)
        raw_min = min(raw_min, raw)
        if raw < -ERGOTROPY_CLAMP:
            raise NumericalConsistencyError(
                f"ergotropy {raw:.3e} below -{ERGOTROPY_CLAMP:.0e} at "
                f"t={times[k]:g}")
        ergo[k] = max(raw, 0.0)
        entropy[k] = von_neumann_entropy(rho_a)
        sigma[k] = site_populations(rho_a, spec)
        n_exc[k] = float(prob @ exc_diag)
        parity[k] = float(prob @ par_diag)
        leak[k] = leakage(psi, spec)
        norm_error[k] = abs(float(np.linalg.norm(psi.amplitudes)) - 1.0)
        e_total = ham.h_total.expectation(psi.amplitudes).real
        if k == 0:
            e_total_0 = e_total
        energy_drift[k] = (abs(e_total - e_total_0)
                           / max(abs(e_total_0), 1e-12))

    trace = EvolutionTrace(
        times=times, energy=energy, charging=energy - energy[0],
        ergotropy=ergo, entropy=entropy, sigma=sigma, n_exc=n_exc,
        parity=parity, leakage=leak, norm_error=norm_error,
        energy_drift=energy_drift, ergotropy_raw_min=float(raw_min))
    summary = {
        "ground_energy": e0,
        "ground_degenerate": degenerate,
        "total_energy_t0": e_total_0,
        "max_leakage": trace.max_leakage,
        "leakage_warning": trace.max_leakage > LEAKAGE_WARN,
        "max_norm_error": trace.max_norm_error,
        "max_energy_drift": trace.max_energy_drift,
        "ergotropy_raw_min": float(raw_min),
    }
    return trace, summary


# ---------------------------------------------------------------------------
# File output

def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_text_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, payload: dict) -> None:
    _write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _trace_csv(trace: EvolutionTrace, n_ions: int) -> str:
    header = (["t", "E", "E_c", "E_e", "S"]
              + [f"sigma_{i}" for i in range(1, n_ions + 1)]
              + ["n_exc", "parity", "leakage", "norm_error", "energy_drift"])
    lines = [",".join(header)]
    for k in range(trace.n_samples):
        row = ([trace.times[k], trace.energy[k], trace.charging[k],
                trace.ergotropy[k], trace.entropy[k]]
               + list(trace.sigma[k])
               + [trace.n_exc[k], trace.parity[k], trace.leakage[k],
                  trace.norm_error[k], trace.energy_drift[k]])
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _sidecar(kind: str, config: RunConfig, files: dict[str, str],
             extra: dict) -> dict:
    return {
        "kind": kind,
        "version": _package_version(),
        "config": config_to_mapping(config),
        "files": files,
        **extra,
    }


# ---------------------------------------------------------------------------
# Drivers

def run_evolution(config: RunConfig) -> EvolutionTrace:
    """Single-run driver: trajectory, observables, evolution.csv + .json."""
    if config.is_sweep:
        raise ConfigError("run_evolution needs a single-run config; use "
                          "run_trace_sweep or run_max_scan for sweeps",
                          key="sweep_param")
    trace, summary = evaluate_trace(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_text = _trace_csv(trace, config.spec.n_ions)
    _write_text_atomic(out / "evolution.csv", csv_text)
    if summary["leakage_warning"]:
        warnings.warn(f"boson truncation leakage {summary['max_leakage']:.3e} "
                      f"exceeds {LEAKAGE_WARN:.0e}; increase fock_dim")
    meta = _sidecar("evolution", config,
                    {"evolution.csv": _sha256(csv_text)},
                    {"summary": summary, "n_samples": trace.n_samples})
    _write_json(out / "evolution.json", meta)
    return trace


def _map_grid(config: RunConfig, fn: Callable[[float], object]) -> list:
    """Apply fn to each grid value, serially or with a thread pool.

    Results come back in grid order either way, so output files do not
    depend on scheduling.
    """
    values = list(config.sweep_grid)
    if config.workers == 1 or len(values) <= 1:
        return [fn(v) for v in values]
    with concurrent.futures.ThreadPoolExecutor(config.workers) as pool:
        return list(pool.map(fn, values))


def run_max_scan(config: RunConfig) -> list[dict]:
    """Sweep driver: window maxima of E_c and E_e per grid point.

    Writes maxscan.csv (one row per grid value) and maxscan.json.
    """
    if not config.is_sweep or config.sweep_reduction != "max_over_window":
        raise ConfigError("run_max_scan needs sweep_reduction = "
                          "max_over_window", key="sweep_reduction")

    def point(value: float) -> dict:
        point_config = dataclasses.replace(
            config, model=_sweep_point_model(config, value),
            sweep_param=None, sweep_grid=())
        trace, summary = evaluate_trace(point_config)
        window = trace.times <= config.window_t_max + 1e-12
        t_w = trace.times[window]
        e_c = trace.charging[window]
        e_e = trace.ergotropy[window]
        k_c = int(np.argmax(e_c))
        k_e = int(np.argmax(e_e))
        return {
            config.sweep_param: float(value),
            "max_E_c": float(e_c[k_c]),
            "t_at_max_E_c": float(t_w[k_c]),
            "max_E_e": float(e_e[k_e]),
            "t_at_max_E_e": float(t_w[k_e]),
            "leakage_warning": summary["leakage_warning"],
        }

    rows = _map_grid(config, point)
    header = [config.sweep_param, "max_E_c", "t_at_max_E_c",
              "max_E_e", "t_at_max_E_e"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[col]) for col in header))
    csv_text = "\n".join(lines) + "\n"

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_text_atomic(out / "maxscan.csv", csv_text)
    meta = _sidecar("max_scan", config, {"maxscan.csv": _sha256(csv_text)},
                    {"window_t_max": config.window_t_max,
                     "n_points": len(rows),
                     "leakage_warning": any(r["leakage_warning"] for r in rows)})
    _write_json(out / "maxscan.json", meta)
    return rows


def run_spectrum_scan(config: RunConfig) -> SpectrumScan:
    """Spin-spectrum driver along a J grid; boson space is not involved.

    Writes spectrum_<hopping_mode>.csv per requested mode plus spectrum.json,
    and returns the scan for the configured hopping mode.
    """
    if config.sweep_param != "j_hop":
        raise ConfigError("run_spectrum_scan needs sweep_param = j_hop",
                          key="sweep_param")
    if config.spectrum_modes == "both":
        modes = list(HOPPING_MODES)
    else:
        modes = [config.model.hopping_mode]

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dim = config.spec.spin_dim
    files: dict[str, str] = {}
    scans: dict[str, SpectrumScan] = {}
    for mode in modes:
        template = dataclasses.replace(config.model, hopping_mode=mode)
        scan = spectrum_scan(template, config.sweep_grid)
        scans[mode] = scan
        header = (["j_hop"] + [f"e_{k}" for k in range(dim)]
                  + ["m_z", "o_z", "degenerate"])
        lines = [",".join(header)]
        for i in range(scan.j_grid.size):
            row = ([_fmt(scan.j_grid[i])]
                   + [_fmt(v) for v in scan.eigenvalues[i]]
                   + [_fmt(scan.m_z[i]), _fmt(scan.o_z[i]),
                      str(int(scan.degenerate[i]))])
            lines.append(",".join(row))
        csv_text = "\n".join(lines) + "\n"
        name = f"spectrum_{mode}.csv"
        _write_text_atomic(out / name, csv_text)
        files[name] = _sha256(csv_text)

    meta = _sidecar("spectrum_scan", config, files,
                    {"modes": modes, "n_points": len(config.sweep_grid)})
    _write_json(out / "spectrum.json", meta)
    return scans[config.model.hopping_mode]


def run_trace_sweep(config: RunConfig) -> list[EvolutionTrace]:
    """Sweep driver keeping a full trajectory per grid point.

    Each point runs run_evolution in <out_dir>/<param>=<value>/; a top-level
    sweep.json indexes the points.
    """
    if not config.is_sweep or config.sweep_reduction != "trace":
        raise ConfigError("run_trace_sweep needs sweep_reduction = trace",
                          key="sweep_reduction")

    def point(value: float) -> EvolutionTrace:
        sub = Path(config.out_dir) / f"{config.sweep_param}={value!r}"
        point_config = dataclasses.replace(
            config, model=_sweep_point_model(config, value),
            sweep_param=None, sweep_grid=(), out_dir=str(sub))
        return run_evolution(point_config)

    traces = _map_grid(config, point)
    meta = _sidecar("trace_sweep", config, {},
                    {"points": [f"{config.sweep_param}={v!r}"
                                for v in config.sweep_grid]})
    _write_json(Path(config.out_dir) / "sweep.json", meta)
    return traces
