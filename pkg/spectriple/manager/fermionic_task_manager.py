import logging
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np
from tqdm import tqdm

from spectriple.constants import DEFAULT_SEED_INT, OPTIMAL_CPU_NUM
from spectriple.core.catalog import electrodynamics_triple
from spectriple.core.clifford import build_gammas
from spectriple.core.exceptions import SpectralTripleException
from spectriple.core.fermionic import (antisymmetry_residual, build_hplus,
                                       certify_decomposition,
                                       decomposed_action,
                                       fermionic_action_grassmann,
                                       fluctuated_dirac, mapping_residuals,
                                       zero_mode_gauge_phases)
from spectriple.parsers.cli_specs import GAUGE_MODE, parse_gauge, parse_modes
from spectriple.utils.timeout import timeout_decorator

logger = logging.getLogger("spectriple")

# (gauge spec, mass) pairs run for every mode count
DEFAULT_CONFIGURATIONS = (("none", 0.0), ("none", 1.0), ("constant", 1.0), (GAUGE_MODE, 1.0))


class TaskManagerFermionic:
    """
    Certifies the decomposition of the fermionic action on truncated mode
    spaces.

    Every task is a dict with ``modes`` (count or explicit spec), ``mass``,
    ``gauge`` (spec string) and ``seed``; results are written into it.

    Parameters
    ----------
    n_jobs : int, optional
        Number of worker threads.
    pairs : int, optional
        Random H+ pairs for the antisymmetry check.
    """

    def __init__(self, n_jobs=OPTIMAL_CPU_NUM, pairs=100, raise_exception=True, timeout=None):
        self.n_jobs = n_jobs
        self.pairs = pairs
        self.raise_exception = raise_exception
        if timeout is not None:
            self._CHECK_TIMEOUT = timeout
        self.gammas = build_gammas()

    @staticmethod
    def build_task_list(mode_counts=range(1, 9), configurations=DEFAULT_CONFIGURATIONS, seed=DEFAULT_SEED_INT):
        """
        The mode-count by configuration grid. A single mode has no nonzero
        gauge mode, so that combination is left out.
        """
        grid = [
            (count, gauge, mass)
            for count in mode_counts
            for gauge, mass in configurations
            if not (gauge == GAUGE_MODE and count == 1)
        ]
        children = np.random.SeedSequence(seed).spawn(len(grid))
        return [
            {"modes": count, "gauge": gauge, "mass": mass, "seed": child}
            for (count, gauge, mass), child in zip(grid, children)
        ]

    def check_single(self, task):
        task["status"] = 0
        try:
            rng = np.random.default_rng(task["seed"])
            ms = parse_modes(task["modes"])
            gauge = parse_gauge(task["gauge"], ms, rng)
            mass = float(task["mass"])
            g = self.gammas

            certificate = certify_decomposition(ms, gauge, mass, g)
            doubled = certify_decomposition(ms, gauge, mass, g, factor=1.0)

            finite = electrodynamics_triple(-1j * mass)
            basis = build_hplus(ms, g, finite)
            d_a = fluctuated_dirac(ms, g, finite, gauge)
            action = fermionic_action_grassmann(d_a, basis)
            phases = zero_mode_gauge_phases(basis, float(rng.uniform(0, 2 * np.pi)))
            rotated_expected = decomposed_action(basis, mass, gauge, g).rotated(phases)
            mapping = mapping_residuals(basis, d_a, g)

            task["mode_count"] = len(ms)
            task["dim_hplus"] = len(basis)
            task["deviation"] = certificate.deviation
            task["action_norm"] = certificate.action_norm
            task["symmetric_part"] = certificate.symmetric_part
            task["block_sparsity"] = certificate.block_sparsity
            # with factor 1 the mismatch is the whole action
            task["factor_check"] = abs(doubled.deviation - certificate.action_norm)
            task["antisymmetry"] = antisymmetry_residual(d_a, basis, rng, self.pairs)
            task["gauge_invariance"] = action.rotated(phases).deviation(action)
            task["rotated_deviation"] = action.rotated(phases).deviation(rotated_expected)
            task["j_to_hminus"] = mapping["j_to_hminus"]
            task["d_to_hminus"] = mapping["d_to_hminus"]
            task["slot_images"] = mapping["slot_images"]
            task["status"] = 1
        except SpectralTripleException as e:
            logger.error("fermionic task %s/%s failed: %s", task["modes"], task["gauge"], e)
            task["failure"] = str(e)
            if self.raise_exception:
                raise e

    def check_task_single(self, task_list):
        for task in tqdm(task_list, disable=len(task_list) < 2):
            self.check_single(task)

    def check_task_parallel(self, task_list):
        with ThreadPoolExecutor(max_workers=self.n_jobs) as executor:
            futures = [executor.submit(self.check_single, task) for task in task_list]
            for future in tqdm(as_completed(futures), total=len(futures)):
                future.result()

    @timeout_decorator()
    def inplace_check(self, task_list):
        if self.n_jobs == 1:
            self.check_task_single(task_list)
        else:
            self.check_task_parallel(task_list)
        return task_list

    @staticmethod
    def summarize(task_list):
        done = [task for task in task_list if task.get("status") == 1]

        def worst(key):
            return max((task[key] for task in done), default=None)

        return {
            "configurations": len(task_list),
            "finished": len(done),
            "max_deviation": worst("deviation"),
            "max_antisymmetry": worst("antisymmetry"),
            "max_factor_check": worst("factor_check"),
            "max_gauge_invariance": worst("gauge_invariance"),
            "max_rotated_deviation": worst("rotated_deviation"),
            "max_j_to_hminus": worst("j_to_hminus"),
            "max_d_to_hminus": worst("d_to_hminus"),
        }
