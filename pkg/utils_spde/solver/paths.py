# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Monte Carlo simulation of sample paths, one reproducible stream per path."""

import logging
from collections import namedtuple
from functools import partial
from multiprocessing import Pool, cpu_count

import numpy as np
from tqdm import tqdm

from utils_spde.common.exceptions import BlowUpDetected, InvalidArgument
from utils_spde.common.rng import path_noise_block
from utils_spde.common.timer import Timer
from utils_spde.noise.covariance import covariance_matrix
from utils_spde.noise.models import parse_model
from utils_spde.solver.specs import FieldState, parse_initial_condition, parse_sigma
from utils_spde.solver.stepping import decay_factors, dt_max
from utils_spde.spectral.basis import build_basis
from utils_spde.spectral.grid import Grid1D

logger = logging.getLogger(__name__)

SimulationSetup = namedtuple("SimulationSetup", ["grid", "basis", "cov", "sigma", "u0"])
PathBundle = namedtuple("PathBundle", ["times", "values", "blown_up", "path_ids", "lam", "dt"])


def prepare_setup(config, basis=None, cov=None):
    """Builds the grid, basis, covariance, sigma and initial values a config describes.

    Args:
        config (ExperimentConfig): Experiment configuration.
        basis (SpectralBasis, optional): Basis to use instead of `build_basis`.
        cov (SpatialCovariance, optional): Covariance to use instead of `covariance_matrix`.

    Returns:
        SimulationSetup: The pieces shared by all paths.
    """
    grid = basis.grid if basis is not None else Grid1D(config.n_cells)
    if basis is None:
        basis = build_basis(config.alpha, grid, config.n_modes)
    if cov is None:
        cov = covariance_matrix(grid, parse_model(config.noise))
    sigma = parse_sigma(config.sigma)
    u0 = parse_initial_condition(config.u0).values(grid, basis)
    return SimulationSetup(grid, basis, cov, sigma, u0)


def step_schedule(times, dt):
    """Step sizes that land exactly on every output time.

    Each interval between consecutive output times (starting at 0) is split into
    ceil(length / dt) equal steps.

    Returns:
        tuple: (steps, snapshot_after) where steps is the array of step sizes and
            snapshot_after[i] is the number of steps taken when times[i] is reached.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise InvalidArgument("Output times must be nonnegative and sorted: {}".format(times))
    steps, snapshot_after = [], []
    previous = 0.0
    for t in times:
        length = t - previous
        if length > 0:
            n = int(np.ceil(length / dt - 1e-9))
            steps.extend([length / n] * n)
        snapshot_after.append(len(steps))
        previous = t
    return np.array(steps), snapshot_after


def resolve_dt(config_dt, lam, sigma, cov):
    """The configured dt, reduced to dt_max when the noise level requires it."""
    limit = dt_max(lam, sigma, cov)
    if config_dt > limit:
        logger.warning(
            "dt={} exceeds dt_max={:.4g} at lam={}, using dt_max".format(config_dt, limit, lam)
        )
        return limit
    return config_dt


def _simulate_batch(path_ids, setup, lam, times, dt, seed, with_drift=True):
    """Simulates a batch of paths in modal coefficients.

    Returns:
        tuple: values (n_paths, n_times, n_cells) and blow-up flags (n_paths,).
    """
    basis, cov, sigma = setup.basis, setup.cov, setup.sigma
    h = basis.h
    steps, snapshot_after = step_schedule(times, dt)
    n_paths, n_cells = len(path_ids), basis.grid.n_cells
    noise = np.stack(
        [path_noise_block(seed, path_id, len(steps), n_cells) for path_id in path_ids], axis=1
    )
    coefficients = np.tile(basis.project(setup.u0), (n_paths, 1))
    blown_up = np.zeros(n_paths, dtype=bool)
    values = np.empty((n_paths, len(times), n_cells))
    # decay factors per distinct step size
    decays = {step: decay_factors(basis, step, with_drift) for step in np.unique(steps)}

    k = 0
    for i, n_done in enumerate(snapshot_after):
        while k < n_done:
            step = steps[k]
            if lam > 0:
                u = coefficients @ basis.phi
                increment = np.sqrt(step) * cov.correlate(noise[k])
                with np.errstate(over="ignore", invalid="ignore"):
                    coefficients = coefficients + lam * h * (sigma(u) * increment) @ basis.phi.T
            coefficients = coefficients * decays[step]
            bad = ~np.all(np.isfinite(coefficients), axis=1)
            if np.any(bad):
                blown_up |= bad
                coefficients[bad] = 0.0
            k += 1
        values[:, i, :] = coefficients @ basis.phi
    values[blown_up] = np.nan
    return values, blown_up


def simulate_paths(
    config,
    path_ids=None,
    lam=None,
    basis=None,
    cov=None,
    with_drift=True,
    verbose=False,
):
    """Simulates many paths, in batches and optionally over worker processes.

    Every path draws its noise from its own stream, so results do not depend on the
    batch size or the number of workers.

    Args:
        config (ExperimentConfig): Experiment configuration.
        path_ids (iterable, optional): Paths to simulate. Defaults to range(config.n_paths).
        lam (float, optional): Noise level. Defaults to the first of config.lambdas.
        basis (SpectralBasis, optional): Overrides the basis built from the config.
        cov (SpatialCovariance, optional): Overrides the covariance built from the config.
        with_drift (bool, optional): With False the semigroup is switched off (test hook).
        verbose (bool, optional): Show a progress bar.

    Returns:
        PathBundle: Output times, values (n_paths, n_times, n_cells) with NaN rows for
            blown-up paths, blow-up flags, path ids, noise level and the step used.
    """
    setup = prepare_setup(config, basis, cov)
    lam = config.lambdas[0] if lam is None else float(lam)
    path_ids = np.arange(config.n_paths) if path_ids is None else np.asarray(path_ids)
    times = np.asarray(config.times, dtype=float)
    dt = resolve_dt(config.dt, lam, setup.sigma, setup.cov)
    batches = [
        path_ids[i : i + config.batch_size] for i in range(0, len(path_ids), config.batch_size)
    ]
    worker = partial(
        _simulate_batch,
        setup=setup,
        lam=lam,
        times=times,
        dt=dt,
        seed=config.seed,
        with_drift=with_drift,
    )

    num_workers = cpu_count() if config.num_workers == -1 else config.num_workers
    num_workers = min(num_workers, len(batches))
    with Timer() as t:
        if num_workers > 1:
            with Pool(num_workers) as pool:
                results = pool.map(worker, batches)
        else:
            results = [worker(batch) for batch in tqdm(batches, desc="paths", disable=not verbose)]

    values = np.concatenate([r[0] for r in results], axis=0)
    blown_up = np.concatenate([r[1] for r in results])
    logger.info(
        "Simulated {} paths at lam={} in {} s ({} workers)".format(
            len(path_ids), lam, t, max(num_workers, 1)
        )
    )
    if blown_up.any():
        logger.warning(
            "{} of {} paths blew up at lam={}".format(int(blown_up.sum()), len(path_ids), lam)
        )
    return PathBundle(times, values, blown_up, path_ids, lam, dt)


def simulate_path(config, path_id, lam=None, basis=None, cov=None, with_drift=True):
    """Simulates one path.

    Returns:
        list: FieldState snapshots at config.times.

    Raises:
        BlowUpDetected: If the path leaves the floating-point range.
    """
    bundle = simulate_paths(
        config, [path_id], lam=lam, basis=basis, cov=cov, with_drift=with_drift
    )
    if bundle.blown_up[0]:
        raise BlowUpDetected("Path {} blew up".format(path_id), [path_id])
    return [
        FieldState(float(t), bundle.values[0, i], int(path_id)) for i, t in enumerate(bundle.times)
    ]
