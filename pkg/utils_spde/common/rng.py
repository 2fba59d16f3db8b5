# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Reproducible random streams derived from one master seed.

Every consumer owns an independent counter-based Philox stream keyed by the
master seed and a tuple of integer keys (for Monte Carlo paths the key is the
path id). Draws never depend on how paths are batched or on the number of
worker processes.
"""

import numpy as np

from utils_spde.common.exceptions import InvalidArgument

# Key namespaces, so that path streams and auxiliary streams never collide.
PATH_NAMESPACE = 0
AUX_NAMESPACE = 1


def _seed_sequence(master_seed, keys):
    if master_seed is None or int(master_seed) < 0:
        raise InvalidArgument("master_seed must be a nonnegative integer, got {}".format(master_seed))
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))


def path_stream(master_seed, path_id):
    """Returns the generator owned by one Monte Carlo path.

    Args:
        master_seed (int): Master seed of the run.
        path_id (int): Nonnegative path identifier.

    Returns:
        numpy.random.Generator: Philox-backed generator.
    """
    if path_id < 0:
        raise InvalidArgument("path_id must be nonnegative, got {}".format(path_id))
    seq = _seed_sequence(master_seed, (PATH_NAMESPACE, path_id))
    return np.random.Generator(np.random.Philox(seq))


def sub_stream(master_seed, *keys):
    """Returns an auxiliary generator identified by integer keys.

    Args:
        master_seed (int): Master seed of the run.
        *keys (int): Any number of nonnegative integers naming the consumer.

    Returns:
        numpy.random.Generator: Philox-backed generator.
    """
    seq = _seed_sequence(master_seed, (AUX_NAMESPACE,) + tuple(keys))
    return np.random.Generator(np.random.Philox(seq))


def path_noise_block(master_seed, path_id, n_steps, n_cells):
    """Draws all standard normals a path consumes, in time-step order.

    Row k holds the draws of time step k, so the (path, step) pair always maps to the
    same counter range of the path's stream.

    Returns:
        numpy.ndarray: Array of shape (n_steps, n_cells).
    """
    return path_stream(master_seed, path_id).standard_normal((n_steps, n_cells))
