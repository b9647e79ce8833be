import logging
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np
from tqdm import tqdm

from spectriple.constants import DEFAULT_SEED_INT, OPTIMAL_CPU_NUM
from spectriple.core.clifford import build_gammas
from spectriple.core.spectral_action import (closed_form_lagrangian,
                                             compare_lagrangian,
                                             isolated_term_errors,
                                             random_geometry,
                                             random_model_point,
                                             random_moments)
from spectriple.utils.timeout import timeout_decorator

logger = logging.getLogger("spectriple")


class TaskManagerLagrangian:
    """
    Certifies the spectral-action Lagrangian on seeded random draws of
    curvature, finite Dirac parameter, gauge curvature and moments.

    Parameters
    ----------
    n_jobs : int, optional
        Number of worker threads, by default ``OPTIMAL_CPU_NUM``.
    include_ds : bool, optional
        Report the Lagrangian with the Laplacian(s) term (never compared).
    raise_exception : bool, optional
        Re-raise errors of single draws instead of recording them.
    """

    def __init__(self, n_jobs=OPTIMAL_CPU_NUM, include_ds=False, raise_exception=True, timeout=None):
        self.n_jobs = n_jobs
        self.include_ds = include_ds
        self.raise_exception = raise_exception
        if timeout is not None:
            self._CHECK_TIMEOUT = timeout
        self.gammas = build_gammas()

    @staticmethod
    def build_task_list(trials, seed=DEFAULT_SEED_INT):
        """One task per draw, each with its own child seed."""
        children = np.random.SeedSequence(seed).spawn(trials)
        return [{"trial": k, "seed": child} for k, child in enumerate(children)]

    def check_single(self, task):
        task["status"] = 0
        try:
            rng = np.random.default_rng(task["seed"])
            geom = random_geometry(rng)
            model = random_model_point(rng)
            moments = random_moments(rng)
            task["error"] = compare_lagrangian(geom, model, moments, self.gammas)
            isolated = isolated_term_errors(geom, model, moments, self.gammas)
            task["L_H_error"] = isolated["L_H"]
            task["L_Y_error"] = isolated["L_Y"]
            task["lagrangian"] = closed_form_lagrangian(geom, model, moments, self.include_ds)
            task["status"] = 1
        except Exception as e:
            logger.error("trial %s failed: %s", task["trial"], e)
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
        """Largest full and term-isolated errors over finished draws."""
        done = [task for task in task_list if task.get("status") == 1]
        return {
            "trials": len(task_list),
            "finished": len(done),
            "max_error": max((task["error"] for task in done), default=None),
            "max_L_H_error": max((task["L_H_error"] for task in done), default=None),
            "max_L_Y_error": max((task["L_Y_error"] for task in done), default=None),
        }
