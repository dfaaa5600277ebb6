"""
Pipeline Service - figure-data pipelines behind each CLI command
Each pipeline takes a validated RunConfig, runs the owning service and writes
its artifacts through an OutputWriter. The returned dict is the run summary.
"""

import asyncio
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from starkchain.core.config import get_settings
from starkchain.core.errors import ParameterError
from starkchain.core.logging import get_logger
from starkchain.models import ChainParams, Command, RunConfig
from starkchain.services.asymptotics_service import (
    BranchClassification,
    BranchKind,
    classify_branch,
    finite_size_scales,
    screening_gamma,
    screening_scale,
    tail_slope,
)
from starkchain.services.chain_service import build_cdw_orbitals, build_hamiltonian, site_indices
from starkchain.services.dynamics_service import EntropyTrace, entropy_trace, excess_entropy
from starkchain.services.gauge_service import (
    fit_log_increment,
    fit_log_power_law,
    gauge_closed_form,
    gauge_product,
    skin_exponent,
)
from starkchain.services.output_service import OutputWriter
from starkchain.services.spectral_service import (
    build_localization_map,
    eigensolve,
    ipr_top_fraction,
    line_cut,
    mean_edge_polarization,
)

logger = get_logger(__name__)

# Late-time window in which the threshold trace should lead its neighbours
LATE_WINDOW = (6.0, 8.0)


def branch_record(branch: BranchClassification) -> Dict[str, Any]:
    return {
        "ratio": branch.ratio,
        "kind": branch.kind.value,
        "q": branch.q,
        "kappa": branch.kappa,
        "r_star": branch.r_star,
        "roots": [[r.real, r.imag] for r in branch.roots],
    }


def classification_record(params: ChainParams) -> Dict[str, Any]:
    record = branch_record(classify_branch(params))
    scales = finite_size_scales(params)
    record.update({
        "eta": skin_exponent(params),
        "Xi_N": scales.Xi_N,
        "Lambda_N": scales.Lambda_N,
        "j_star": scales.j_star,
        "delta": scales.delta,
        "delta_N": scales.delta_N,
        "delta_N_gamma": scales.delta_N_gamma,
    })
    return record


def _trace_for_ratio(params: ChainParams, ratio: Optional[float], t_max: float, dt: float, every: int) -> EntropyTrace:
    run_params = params if ratio is None else params.with_ratio(ratio)
    return entropy_trace(run_params, t_max, dt, build_cdw_orbitals(params.N), restabilize_every=every)


async def _traces_async(params: ChainParams, ratios: List[Optional[float]], t_max: float, dt: float,
                        every: int, threads: int) -> List[EntropyTrace]:
    if threads <= 1 or len(ratios) == 1:
        return [_trace_for_ratio(params, r, t_max, dt, every) for r in ratios]
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=min(threads, len(ratios))) as pool:
        futures = [loop.run_in_executor(pool, _trace_for_ratio, params, r, t_max, dt, every) for r in ratios]
        return list(await asyncio.gather(*futures))


def _late_window_min(times: np.ndarray, values: np.ndarray) -> Optional[float]:
    mask = (times >= LATE_WINDOW[0] - 1e-9) & (times <= LATE_WINDOW[1] + 1e-9)
    return float(values[mask].min()) if np.any(mask) else None


class PipelineService:
    """Runs the figure-data pipeline behind each CLI command."""

    def __init__(self):
        self.pipelines = {
            Command.SKIN_FACTOR: self.skin_factor,
            Command.CLASSIFY: self.classify,
            Command.LOCALIZATION_MAP: self.localization_map,
            Command.ENTANGLEMENT: self.entanglement,
            Command.SPECTRUM: self.spectrum,
        }

    def run(self, config: RunConfig, writer: OutputWriter, threads: int = 1) -> Tuple[Dict[str, Any], List]:
        """Dispatch on config.command; returns the summary and every file written."""
        summary = self.pipelines[config.command](config, writer, threads)
        return summary, list(writer.files)

    def classify(self, config: RunConfig, writer: OutputWriter, threads: int = 1) -> Dict[str, Any]:
        record = classification_record(config.params)
        writer.write_record("classify", record)
        return record

    def skin_factor(self, config: RunConfig, writer: OutputWriter, threads: int = 1) -> Dict[str, Any]:
        params = config.params
        window = config.fit.window
        increment_window = config.fit.increment_window
        if window[1] > params.N or increment_window[1] > params.N - 1:
            raise ParameterError(
                f"fit windows {window} / {increment_window} exceed the chain (N={params.N}, {params.N - 1} bonds)"
            )

        gauge = gauge_product(params)
        closed = gauge_closed_form(params)
        closed_form_error = float(np.max(np.abs(np.expm1(closed.log_d - gauge.log_d))))

        j = site_indices(params.N)
        increments = np.append(gauge.log_increments, np.nan)
        power_law = fit_log_power_law(gauge.log_d, window)
        increment_fit, origin_slope = fit_log_increment(gauge, increment_window)

        summary = {
            "eta": gauge.eta,
            "eta_fit": power_law.exponent,
            "fit_intercept": power_law.intercept,
            "fit_constant_C": float(np.exp(power_law.intercept)),
            "fit_residual": power_law.residual,
            "fit_window": list(window),
            "increment_coefficient_fit": increment_fit.slope,
            "increment_intercept_fit": increment_fit.intercept,
            "increment_coefficient_through_origin": origin_slope,
            "increment_window": list(increment_window),
            "Xi_N": screening_scale(params),
            "closed_form_max_rel_error": closed_form_error,
        }

        writer.write_table(
            "skin_factor",
            {"j": j.astype(int), "d_j": gauge.d, "log_d_j": gauge.log_d,
             "log_increment_to_next": increments, "inv_j": 1.0 / j},
            summary,
        )
        writer.write_table(
            "skin_loglog",
            {"log_j": np.log(j), "log_d_j": gauge.log_d,
             "fit_log_d_j": power_law.intercept + power_law.exponent * np.log(j)},
            {"fit_window": list(window), "eta_fit": power_law.exponent},
        )
        bonds = np.arange(1, params.N)
        writer.write_table(
            "skin_increment",
            {"j": bonds, "inv_j": 1.0 / bonds, "log_increment": gauge.log_increments,
             "fit_log_increment": increment_fit.intercept + increment_fit.slope / bonds},
            {"increment_window": list(increment_window), "increment_coefficient_fit": increment_fit.slope},
        )
        logger.info(f"skin factor: eta={gauge.eta:.6g}, eta_fit={power_law.exponent:.6f}, increment fit={increment_fit.slope:.6f}")
        return summary

    def spectrum(self, config: RunConfig, writer: OutputWriter, threads: int = 1) -> Dict[str, Any]:
        cfg = get_settings()
        params = config.params
        eigs = eigensolve(params)
        H = build_hamiltonian(params).entries
        summary: Dict[str, Any] = {
            "mean_pol": mean_edge_polarization(eigs),
            "ipr_top_fraction": ipr_top_fraction(eigs, cfg.ipr_fraction),
            "ipr_fraction": cfg.ipr_fraction,
            "biorthogonality_defect": eigs.biorthogonality_defect(),
            "max_right_residual": float(np.max(eigs.right_residuals(H))),
            "branch": classification_record(params),
        }
        branch = classify_branch(params)
        if branch.kind is BranchKind.LOCALIZED:
            fit = tail_slope(eigs.phi[:, 0], summary["branch"]["j_star"])
            summary["tail_fit"] = {"state": 0, "slope": fit.slope, "kappa": branch.kappa,
                                   "relative_error": abs(-fit.slope - branch.kappa) / branch.kappa}
        writer.write_table(
            "spectrum",
            {"n": np.arange(eigs.size), "energy": eigs.energies, "X": eigs.X, "ipr": eigs.ipr, "pol": eigs.pol},
            summary,
        )
        return summary

    def localization_map(self, config: RunConfig, writer: OutputWriter, threads: int = 1) -> Dict[str, Any]:
        params = config.params
        grids = config.grids
        gammas = grids.gamma_values()
        ratios = grids.ratio_values()
        loc_map = build_localization_map(params, gammas, ratios, threads=threads)

        gamma_col = np.repeat(gammas, ratios.size)
        ratio_col = np.tile(ratios, gammas.size)
        header = {
            "gamma_grid": gammas,
            "ratio_grid": ratios,
            "fixed": {"N": params.N, "J": params.J, "F2": params.F2},
            "guide_lines": {"ratio_threshold": 2.0, "gamma_Xi_N_5": screening_gamma(params.N, params.F2, 5.0)},
            "invalid_cells": int(np.count_nonzero(~loc_map.valid)),
            "invalid_reasons": {f"{i},{k}": reason for (i, k), reason in sorted(loc_map.reasons.items())},
        }
        writer.write_table(
            "localization_map",
            {"gamma": gamma_col, "ratio": ratio_col, "mean_pol": loc_map.mean_pol.ravel(),
             "ipr_top20": loc_map.ipr_top20.ravel(), "valid_flag": loc_map.valid.ravel().astype(int)},
            header,
        )
        for gamma in grids.cuts:
            cut = line_cut(loc_map, gamma)
            writer.write_table(
                f"cut_gamma_{gamma:g}",
                {"ratio": cut.ratio, "mean_pol": cut.mean_pol, "ipr_top20": cut.ipr_top20,
                 "valid_flag": cut.valid.astype(int)},
                {"gamma": cut.gamma},
            )
        return {"shape": list(loc_map.shape), "invalid_cells": header["invalid_cells"],
                "gamma_Xi_N_5": header["guide_lines"]["gamma_Xi_N_5"]}

    def entanglement(self, config: RunConfig, writer: OutputWriter, threads: int = 1) -> Dict[str, Any]:
        params = config.params
        dynamics = config.dynamics
        if not params.is_even:
            raise ParameterError(f"the half-filled initial state needs an even N, got {params.N}")
        # ascending, so the excess entropy always centres on the middle ratio
        ratios: List[Optional[float]] = sorted(dynamics.ratios) if dynamics.ratios else [None]
        if any(r is not None for r in ratios) and not params.has_gradient:
            raise ParameterError("ratios F1/F2 need F2 != 0")

        traces = asyncio.run(_traces_async(params, ratios, dynamics.t_max, dynamics.dt,
                                           dynamics.restabilize_every, threads))
        meta = {"dt": dynamics.dt, "t_max": dynamics.t_max, "restabilize_every": dynamics.restabilize_every,
                "initial_state": dynamics.initial, "cut": [1, params.N // 2]}
        summary: Dict[str, Any] = {"runs": []}
        for ratio, trace in zip(ratios, traces):
            label = f"{ratio:g}" if ratio is not None else "params"
            writer.write_table(
                f"entropy_ratio_{label}",
                {"t": trace.times, "S": trace.S},
                {**meta, "ratio": ratio, "F1": trace.params.F1,
                 "max_projector_defect": float(trace.projector_defect.max())},
            )
            summary["runs"].append({"ratio": ratio, "S_final": float(trace.S[-1]),
                                    "max_projector_defect": float(trace.projector_defect.max())})

        if len(traces) == 3:
            delta = excess_entropy(traces[1], traces[0], traces[2])
            late_min = _late_window_min(traces[1].times, delta)
            summary["deltaS_late_min"] = late_min
            writer.write_table(
                "excess_entropy",
                {"t": traces[0].times,
                 **{f"S_ratio{ratio:g}": trace.S for ratio, trace in zip(ratios, traces)},
                 "deltaS": delta},
                {**meta, "ratios": ratios, "deltaS_late_window": list(LATE_WINDOW), "deltaS_late_min": late_min},
            )
        return summary


# Global instance
pipeline_service: Optional[PipelineService] = None


def initialize_pipeline_service() -> PipelineService:
    """Initialize the global pipeline service instance"""
    global pipeline_service
    pipeline_service = PipelineService()
    return pipeline_service


def get_pipeline_service() -> PipelineService:
    """Get the global pipeline service instance, creating it on first use"""
    if pipeline_service is None:
        return initialize_pipeline_service()
    return pipeline_service
