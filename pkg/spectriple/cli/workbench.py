import logging
import math
import sys
from dataclasses import replace
from typing import List, Optional, Tuple

import fire
import numpy as np

from spectriple.cli.report import (EXIT_BAD_INPUT, EXIT_CHECK_FAILED, EXIT_OK,
                                   Report, argument_digest)
from spectriple.constants import DEFAULT_SEED_INT, DISTANCE_RESTART_AGREEMENT
from spectriple.core.catalog import (electrodynamics_triple,
                                     matches_electrodynamics_pattern)
from spectriple.core.distance import connes_distance
from spectriple.core.exceptions import (InvalidInputError, ModeSpaceError,
                                        RealStructureClassificationError,
                                        SpectralTripleException,
                                        TripleStructureError, TruncationError)
from spectriple.core.gauge import gauge_group
from spectriple.core.linalg import spectral_norm, to_pairs
from spectriple.core.spectral_action import DEFAULT_T_VALUES, heat_trace_torus
from spectriple.core.triple import real_structure_form, solve_dirac_space, verify_axioms
from spectriple.manager.fermionic_task_manager import TaskManagerFermionic
from spectriple.manager.lagrangian_task_manager import TaskManagerLagrangian
from spectriple.parsers.cli_specs import parse_float_list
from spectriple.parsers.triple_json import (bundled_triples, file_digest,
                                            load_triple, resolve_path)

logger = logging.getLogger("spectriple")

BAD_INPUT_ERRORS = (TripleStructureError, InvalidInputError, ModeSpaceError)

LAGRANGIAN_TOL = 1e-10
HEAT_TRACE_RELATIVE_TOL = 0.01
PATTERN_TOL = 1e-9
DECOMPOSITION_TOL = 1e-10
ANTISYMMETRY_TOL = 1e-12

# per-configuration columns written to CSV
FERMIONIC_COLUMNS = (
    "modes", "mode_count", "gauge", "mass", "dim_hplus", "deviation", "action_norm",
    "symmetric_part", "factor_check", "antisymmetry", "gauge_invariance",
    "rotated_deviation", "j_to_hminus", "d_to_hminus",
)


class Workbench:
    """
    Finite spectral triple workbench.

    Parameters
    ----------
    tol : float, optional
        Overrides the tolerance stored in triple documents.
    json : str, optional
        Also write the report to this file.
    csv : str, optional
        Write tabular series (heat traces, trials, configurations) here.
    seed : int, optional
        Root seed of every random draw.
    n_jobs : int, optional
        Worker threads for certification batches.
    """

    _argv: List[str] = []

    def __init__(self, tol=None, json=None, csv=None, seed=DEFAULT_SEED_INT, n_jobs=1):
        self.tol = None if tol is None else float(tol)
        self.json_path = json
        self.csv_path = csv
        self.seed = int(seed)
        self.n_jobs = int(n_jobs)

    def _report(self, path=None) -> Report:
        argv = list(self._argv)
        digest = file_digest(path) if path is not None else argument_digest(argv)
        return Report(command=argv, input_digest=digest)

    def _load(self, path):
        resolved = resolve_path(path)
        triple = load_triple(resolved)
        if self.tol is not None:
            triple = replace(triple, tol=self.tol)
        return resolved, triple

    def _finish(self, report: Report) -> Report:
        if self.json_path:
            report.save_json(self.json_path)
        if self.csv_path:
            report.save_csv(self.csv_path)
        return report

    def verify(self, path):
        """Check every axiom of a triple document and classify its KO dimension."""
        resolved, triple = self._load(path)
        report = self._report(resolved)
        axioms = verify_axioms(triple)
        for check in axioms.checks:
            report.add_check(check.name, check.passed, check.residual)
        report.payload = {"ko_dimension": axioms.ko_dimension, "hilbert_dim": triple.hilbert_dim}
        if axioms.passed and axioms.ko_dimension in (0, 2, 4, 6):
            try:
                form = real_structure_form(triple)
                report.add_check("real_structure_form", True, form.residual)
                report.payload["real_structure_pattern"] = form.pattern
            except RealStructureClassificationError as e:
                report.add_check("real_structure_form", False, None)
                report.payload["real_structure_error"] = str(e)
        return self._finish(report)

    def solve_dirac(self, path):
        """Basis of the admissible Dirac operators of a triple document."""
        resolved, triple = self._load(path)
        report = self._report(resolved)
        basis = solve_dirac_space(triple)
        support = np.zeros((triple.hilbert_dim, triple.hilbert_dim), dtype=bool)
        for b in basis:
            support |= np.abs(b) > triple.tol
        report.payload = {
            "dimension": len(basis),
            "basis": [to_pairs(b) for b in basis],
            "sparsity": support.astype(int),
        }
        reference = electrodynamics_triple()
        same_shape = triple.hilbert_dim == reference.hilbert_dim and triple.grading is not None
        if same_shape and triple.real is not None:
            same_grading = spectral_norm(triple.grading - reference.grading) < triple.tol
            same_real = spectral_norm(triple.real.unitary - reference.real.unitary) < triple.tol
            if same_grading and same_real:
                residual = max((matches_electrodynamics_pattern(b) for b in basis), default=0.0)
                report.add_check("electrodynamics_pattern", residual < PATTERN_TOL, residual)
        return self._finish(report)

    def gauge_group(self, path):
        """Dimensions of u(A), u(Ã_J) and the gauge group."""
        resolved, triple = self._load(path)
        report = self._report(resolved)
        info = gauge_group(triple)
        report.payload = info.to_dict()
        report.add_check("exactness", info.exact, abs(info.dim_gauge - (info.dim_u_A - info.dim_u_tilde)))
        return self._finish(report)

    def distance(self, path, to, **kwargs):
        """Connes distance between points ``--from`` and ``--to``."""
        if "from" not in kwargs:
            raise InvalidInputError("distance needs --from")
        resolved, triple = self._load(path)
        report = self._report(resolved)
        result = connes_distance(triple, int(kwargs["from"]), int(to), rng=np.random.default_rng(self.seed))
        report.payload = result.to_dict()
        values = result.restart_values or [0.0]
        spread = max(values) - min(values)
        allowed = DISTANCE_RESTART_AGREEMENT * max(1.0, result.min_norm or 0.0)
        report.add_check("restarts_agree", spread <= allowed, spread)
        return self._finish(report)

    def check_lagrangian(self, trials=100, include_ds=False):
        """Compare the heat-kernel expansion with the closed-form Lagrangian on random draws."""
        report = self._report()
        manager = TaskManagerLagrangian(n_jobs=self.n_jobs, include_ds=include_ds)
        task_list = manager.inplace_check(manager.build_task_list(int(trials), self.seed))
        summary = manager.summarize(task_list)
        for key in ("max_error", "max_L_H_error", "max_L_Y_error"):
            value = summary[key]
            report.add_check(key, value is not None and value < LAGRANGIAN_TOL, value)
        report.payload = summary
        report.rows = [
            {k: task.get(k) for k in ("trial", "error", "L_H_error", "L_Y_error", "lagrangian")}
            for task in task_list
        ]
        return self._finish(report)

    def heat_trace(self, side=2 * math.pi, cut=30, mass=0.0, t=None, brute_force=False):
        """Heat traces on the flat 4-torus and the fitted a0, a2 densities."""
        report = self._report()
        t_values = DEFAULT_T_VALUES if t is None else parse_float_list(t)
        mass = float(mass)
        result = heat_trace_torus(float(side), int(cut), -1j * mass, t_values, bool(brute_force))
        expected_a0 = 1 / math.pi**2
        expected_a2 = -(mass**2) / math.pi**2
        a0_error = abs(result.a0_density - expected_a0) / expected_a0
        a2_error = abs(result.a2_density - expected_a2) / (max(mass**2, 1.0) / math.pi**2)
        report.add_check("a0_density", a0_error < HEAT_TRACE_RELATIVE_TOL, a0_error)
        report.add_check("a2_density", a2_error < HEAT_TRACE_RELATIVE_TOL, a2_error)
        report.payload = {
            "a0_density": result.a0_density,
            "a2_density": result.a2_density,
            "expected_a0": expected_a0,
            "expected_a2": expected_a2,
            "max_truncation_bound": max(result.truncation_bounds),
        }
        report.rows = result.rows()
        return self._finish(report)

    def fermionic_check(self, modes=None, mass=1.0, gauge="none", pairs=100):
        """
        Certify the fermionic action decomposition for one configuration, or
        for the full grid of mode counts 1..8 when ``--modes`` is omitted.
        """
        report = self._report()
        manager = TaskManagerFermionic(n_jobs=self.n_jobs, pairs=int(pairs))
        if modes is None:
            task_list = manager.build_task_list(seed=self.seed)
        else:
            seed = np.random.SeedSequence(self.seed).spawn(1)[0]
            task_list = [{"modes": modes, "gauge": gauge, "mass": float(mass), "seed": seed}]
        manager.inplace_check(task_list)
        summary = manager.summarize(task_list)
        limits = {
            "max_deviation": DECOMPOSITION_TOL,
            "max_antisymmetry": ANTISYMMETRY_TOL,
            "max_factor_check": DECOMPOSITION_TOL,
            "max_gauge_invariance": DECOMPOSITION_TOL,
            "max_rotated_deviation": DECOMPOSITION_TOL,
            "max_j_to_hminus": ANTISYMMETRY_TOL,
            "max_d_to_hminus": DECOMPOSITION_TOL,
        }
        for key, limit in limits.items():
            value = summary[key]
            report.add_check(key, value is not None and value < limit, value)
        report.payload = {
            "summary": summary,
            "inner_product": "antilinear in the first argument",
            "configurations": [
                {
                    "modes": task["modes"],
                    "gauge": task["gauge"],
                    "mass": task["mass"],
                    "block_sparsity": task.get("block_sparsity"),
                    "slot_images": task.get("slot_images"),
                }
                for task in task_list
            ],
        }
        report.rows = [{k: task.get(k) for k in FERMIONIC_COLUMNS} for task in task_list]
        return self._finish(report)

    def bundled(self):
        """Names of the shipped triple documents."""
        report = self._report()
        report.payload = {"triples": sorted(bundled_triples())}
        return self._finish(report)


def run(argv) -> Tuple[int, Report]:
    """
    Run one command line and return ``(exit_code, report)``.

    Exit code 0 when every check passes, 1 when a check or a computation
    fails, 2 for malformed input or arguments.
    """
    argv = [str(a) for a in argv]
    Workbench._argv = argv
    error_report = Report(command=argv, input_digest=argument_digest(argv))
    try:
        result = fire.Fire(Workbench, command=argv, name="spectriple")
    except fire.core.FireExit as e:
        code = EXIT_OK if not e.code else EXIT_BAD_INPUT
        error_report.error = None if code == EXIT_OK else "invalid arguments"
        error_report.exit_code_override = code
        return code, error_report
    except BAD_INPUT_ERRORS as e:
        logger.critical("run: malformed input: %s", e)
        error_report.error = "%s: %s" % (type(e).__name__, e)
        error_report.exit_code_override = EXIT_BAD_INPUT
        return EXIT_BAD_INPUT, error_report
    except TruncationError as e:
        error_report.error = "%s: %s" % (type(e).__name__, e)
        error_report.payload = {"required_mode_cut": e.required_mode_cut}
        return EXIT_CHECK_FAILED, error_report
    except SpectralTripleException as e:
        logger.critical("run: %s", e)
        error_report.error = "%s: %s" % (type(e).__name__, e)
        return EXIT_CHECK_FAILED, error_report
    if not isinstance(result, Report):
        error_report.error = "no command given"
        error_report.exit_code_override = EXIT_BAD_INPUT
        return EXIT_BAD_INPUT, error_report
    if not result.passed:
        logger.info("run: first failing check %s", result.first_failure)
    return result.exit_code, result


def main_fire_entry_point():
    code, report = run(sys.argv[1:])
    if report.error is not None:
        print(report)
        print(report.error, file=sys.stderr)
    sys.exit(code)


if __name__ == "__main__":
    main_fire_entry_point()
