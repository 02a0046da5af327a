"""Named scenarios: configure, run and export channel diagnostics.

A scenario fixes the collision parameters, a Gaussian polarization profile,
a time grid and a probe state pair, then evaluates the mixture channel and
the requested diagnostic series. Results can be exported as CSV files plus
a JSON summary; reruns of the same configuration reproduce the output files
byte for byte.

Set SWAPMIX_THREADS to split the channel evaluation over worker threads
(default 1); the assembly order is fixed, so the output is identical
whatever the thread count.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core_maps import CollisionParams, as_bloch_vector
from .diagnostics import (
    CP_TOL,
    DeterminantSeries,
    DivisibilityReport,
    TraceDistanceSeries,
    choi_spectrum_series,
    determinant_series,
    divisibility_report,
    pairwise_rate_sums,
    trace_distance_series,
)
from .gksl import canonical_rate_series, generator_series
from .mixture import (
    BallDistribution,
    GaussianSpec,
    build_gaussian,
    mixture_map,
    mixture_map_series,
    write_distribution_csv,
)

__all__ = [
    "OUTPUT_KINDS",
    "ScenarioConfig",
    "ScenarioResult",
    "builtin_scenarios",
    "load_config",
    "run_scenario",
    "write_outputs",
]

OUTPUT_KINDS = ("trace_distance", "determinant", "choi", "rates", "rate_sums")

DEFAULT_ETA = 0.01
DEFAULT_TAU = 1.0
DEFAULT_T_SAMPLES = 2000

# default probe pair: excited state against the maximally mixed state
_Z_PAIR = ((0.0, 0.0, 1.0), (0.0, 0.0, 0.0))
_X_PAIR = ((1.0, 0.0, 0.0), (0.0, 0.0, 0.0))


@dataclass
class ScenarioConfig:
    """Everything needed to run one scenario.

    ``t_max`` of None means five longitudinal relaxation times. The state
    pair holds the two probe Bloch vectors for the trace-distance series.
    ``log_spacing`` switches the grid from linear starting at t = 0 to
    logarithmic over the final four decades up to t_max.
    """

    name: str
    gaussian: GaussianSpec
    eta: float = DEFAULT_ETA
    tau: float = DEFAULT_TAU
    t_max: float | None = None
    t_samples: int = DEFAULT_T_SAMPLES
    state_pair: tuple = _Z_PAIR
    outputs: tuple = OUTPUT_KINDS
    log_spacing: bool = False

    def __post_init__(self) -> None:
        if not self.name or not all(c.isalnum() or c in "._-" for c in self.name):
            raise ValueError(f"scenario name must be filename-safe, got {self.name!r}")
        if self.t_max is not None and not self.t_max > 0.0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if int(self.t_samples) < 2:
            raise ValueError(f"t_samples must be at least 2, got {self.t_samples}")
        self.t_samples = int(self.t_samples)
        pair = tuple(tuple(float(x) for x in r) for r in self.state_pair)
        if len(pair) != 2:
            raise ValueError("state_pair must hold exactly two Bloch vectors")
        for r in pair:
            as_bloch_vector(r)
        self.state_pair = pair
        outputs = tuple(self.outputs)
        unknown = set(outputs) - set(OUTPUT_KINDS)
        if unknown:
            raise ValueError(f"unknown outputs {sorted(unknown)}; allowed: {OUTPUT_KINDS}")
        self.outputs = outputs
        self.log_spacing = bool(self.log_spacing)

    @property
    def params(self) -> CollisionParams:
        return CollisionParams(eta=self.eta, tau=self.tau)

    def resolved_t_max(self) -> float:
        if self.t_max is not None:
            return float(self.t_max)
        return 5.0 / self.params.relaxation_rate

    def time_grid(self) -> np.ndarray:
        t_max = self.resolved_t_max()
        if self.log_spacing:
            return np.geomspace(t_max * 1e-4, t_max, self.t_samples)
        return np.linspace(0.0, t_max, self.t_samples)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "eta": self.eta,
            "tau": self.tau,
            "gaussian": {
                "center": list(self.gaussian.center),
                "widths": list(self.gaussian.widths),
                "grid_spacing": self.gaussian.grid_spacing,
            },
            "t_max": self.t_max,
            "t_samples": self.t_samples,
            "state_pair": [list(r) for r in self.state_pair],
            "outputs": list(self.outputs),
            "log_spacing": self.log_spacing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        g = data.pop("gaussian")
        spec = GaussianSpec(
            center=tuple(g["center"]),
            widths=tuple(g["widths"]),
            grid_spacing=float(g.get("grid_spacing", GaussianSpec.grid_spacing)),
        )
        known = {"name", "eta", "tau", "t_max", "t_samples", "state_pair", "outputs", "log_spacing"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario fields {sorted(unknown)}")
        return cls(gaussian=spec, **data)


def load_config(path) -> ScenarioConfig:
    """Read a scenario configuration from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return ScenarioConfig.from_dict(json.load(fh))


def builtin_scenarios() -> dict[str, ScenarioConfig]:
    """The bundled scenario set, keyed by name."""
    configs = [
        ScenarioConfig(
            name="fig1-delta0.3",
            gaussian=GaussianSpec(center=(0.0, 0.0, 0.0), widths=(0.3, 0.3, 0.3)),
        ),
        ScenarioConfig(
            name="fig1-delta0.1",
            gaussian=GaussianSpec(center=(0.0, 0.0, 0.0), widths=(0.1, 0.1, 0.1)),
        ),
        ScenarioConfig(
            name="fig1-delta0.01",
            gaussian=GaussianSpec(center=(0.0, 0.0, 0.0), widths=(0.01, 0.01, 0.01)),
        ),
        ScenarioConfig(
            name="fig2-anisotropic",
            gaussian=GaussianSpec(center=(0.0, 0.0, 0.0), widths=(0.01, 0.01, 0.7)),
            state_pair=_X_PAIR,
        ),
        ScenarioConfig(
            name="fig3-offset",
            gaussian=GaussianSpec(center=(0.3, 0.0, 0.0), widths=(0.3, 0.3, 0.3)),
        ),
        ScenarioConfig(
            name="fig4-disk",
            gaussian=GaussianSpec(center=(0.3, 0.0, 0.0), widths=(0.01, 0.3, 0.3)),
        ),
    ]
    return {cfg.name: cfg for cfg in configs}


@dataclass
class ScenarioResult:
    """All series computed for one scenario run."""

    config: ScenarioConfig
    distribution: BallDistribution
    times: np.ndarray
    maps: np.ndarray
    trace_distance: TraceDistanceSeries | None = None
    determinant: DeterminantSeries | None = None
    choi_eigenvalues: np.ndarray | None = None
    choi_traces: np.ndarray | None = None
    rates: np.ndarray | None = None
    rate_sums: np.ndarray | None = None
    generator_valid: np.ndarray | None = None
    divisibility: DivisibilityReport | None = None
    written_files: list = field(default_factory=list)

    @property
    def markovian(self) -> bool | None:
        """No trace-distance revival observed; None when not computed."""
        if self.trace_distance is None:
            return None
        return self.trace_distance.witness_time is None

    @property
    def completely_positive(self) -> bool | None:
        """Every Choi sample passes the CP tolerance; None when not computed."""
        if self.choi_eigenvalues is None:
            return None
        return bool(self.choi_eigenvalues.min() >= -CP_TOL)


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    return max(1, int(os.environ.get("SWAPMIX_THREADS", "1")))


def _evaluate_series(dist, params, times, derivatives, threads):
    if threads <= 1 or times.shape[0] < 2 * threads:
        return mixture_map_series(dist, params, times, derivatives=derivatives)
    splits = np.array_split(np.arange(times.shape[0]), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(
            pool.map(
                lambda idx: mixture_map_series(
                    dist, params, times[idx], derivatives=derivatives
                ),
                splits,
            )
        )
    if derivatives:
        return (
            np.concatenate([p[0] for p in parts], axis=0),
            np.concatenate([p[1] for p in parts], axis=0),
        )
    return np.concatenate(parts, axis=0)


def run_scenario(
    config: ScenarioConfig, out_dir=None, threads: int | None = None
) -> ScenarioResult:
    """Run one scenario; optionally export its files to ``out_dir``."""
    params = config.params
    dist = build_gaussian(config.gaussian)
    times = config.time_grid()
    outputs = set(config.outputs)
    need_rates = bool(outputs & {"rates", "rate_sums"})
    need_det = need_rates or "determinant" in outputs

    threads = _thread_count(threads)
    if need_rates:
        maps, derivs = _evaluate_series(dist, params, times, True, threads)
    else:
        maps = _evaluate_series(dist, params, times, False, threads)
        derivs = None

    result = ScenarioResult(
        config=config, distribution=dist, times=times, maps=maps
    )
    if "trace_distance" in outputs:
        result.trace_distance = trace_distance_series(
            maps, config.state_pair[0], config.state_pair[1], times
        )
    if need_det:
        result.determinant = determinant_series(
            times,
            maps,
            det_at=lambda t: float(np.linalg.det(mixture_map(dist, params, t).linear)),
        )
    if "choi" in outputs:
        result.choi_eigenvalues, result.choi_traces = choi_spectrum_series(maps)
    if need_rates:
        gens, valid = generator_series(maps, derivs)
        result.generator_valid = valid
        result.rates = canonical_rate_series(gens, valid)
        result.rate_sums = pairwise_rate_sums(result.rates)
        result.divisibility = divisibility_report(
            times, result.rates, result.determinant.singular_times
        )
    if out_dir is not None:
        result.written_files = write_outputs(result, out_dir)
    return result


def _write_csv(path: Path, header: str, columns) -> None:
    rows = np.column_stack(columns)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _summary_dict(result: ScenarioResult) -> dict:
    cfg = result.config
    summary = {
        "name": cfg.name,
        "eta": cfg.eta,
        "tau": cfg.tau,
        "t_max": float(result.times[-1]),
        "t_samples": cfg.t_samples,
        "relaxation_rate": cfg.params.relaxation_rate,
        "node_count": len(result.distribution),
    }
    if result.trace_distance is not None:
        summary["max_trace_distance_increase"] = result.trace_distance.max_increase
        summary["witness_time"] = result.trace_distance.witness_time
        summary["markovian"] = result.markovian
    if result.determinant is not None:
        summary["min_determinant"] = float(np.min(np.abs(result.determinant.values)))
        summary["singular_times"] = list(result.determinant.singular_times)
    if result.choi_eigenvalues is not None:
        summary["min_choi_eigenvalue"] = float(result.choi_eigenvalues.min())
        summary["choi_trace_max_deviation"] = float(
            np.abs(result.choi_traces - 2.0).max()
        )
        summary["completely_positive"] = result.completely_positive
    if result.divisibility is not None:
        rep = result.divisibility
        summary["verdict"] = rep.verdict
        summary["min_rate"] = rep.min_rate
        summary["min_pairwise_rate_sum"] = rep.min_pairwise_sum
        summary["n_valid_rate_samples"] = rep.n_valid
        summary["rate_tol"] = rep.rate_tol
    return summary


def _json_safe(value):
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    return value


def write_outputs(result: ScenarioResult, out_dir) -> list:
    """Export the computed series as CSV files plus a JSON summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = result.config.name
    t = result.times
    written = []

    def emit(suffix, header, columns):
        path = out / f"{name}_{suffix}.csv"
        _write_csv(path, header, columns)
        written.append(path)

    write_distribution_csv(result.distribution, out / f"{name}_distribution.csv")
    written.append(out / f"{name}_distribution.csv")
    if result.trace_distance is not None:
        emit("trace_distance", "t,trace_distance", (t, result.trace_distance.values))
    if result.determinant is not None and "determinant" in result.config.outputs:
        emit("determinant", "t,det", (t, result.determinant.values))
    if result.choi_eigenvalues is not None:
        emit(
            "choi",
            "t,choi_eig_1,choi_eig_2,choi_eig_3,choi_eig_4,choi_trace",
            (t, result.choi_eigenvalues, result.choi_traces),
        )
    if result.rates is not None and "rates" in result.config.outputs:
        emit("rates", "t,rate_1,rate_2,rate_3", (t, result.rates))
    if result.rate_sums is not None and "rate_sums" in result.config.outputs:
        emit("rate_sums", "t,sum_12,sum_13,sum_23", (t, result.rate_sums))

    summary_path = out / f"{name}_summary.json"
    with open(summary_path, "w", encoding="ascii", newline="") as fh:
        json.dump(_json_safe(_summary_dict(result)), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(summary_path)
    return written
