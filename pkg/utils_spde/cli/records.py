# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Run directories and the RunRecord that makes every artifact traceable to (config, seed)."""

import hashlib
import json
import logging
import os

import jsonlines
import numpy as np

from utils_spde import VERSION
from utils_spde.common.exceptions import PropertyViolation
from utils_spde.common.timer import StageTimer

logger = logging.getLogger(__name__)

RECORD_FILE = "run_record.json"
CONFIG_FILE = "config.json"
FITS_FILE = "fits.jsonl"
LOG_FILE = "run.log"


def sha256_of(path, chunk_size=1 << 16):
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_digest(config):
    """Short hash of the resolved config, used to name run directories."""
    payload = json.dumps(config.to_dict(), sort_keys=True).encode("utf8")
    return hashlib.sha256(payload).hexdigest()[:12]


def make_run_dir(output_dir, command, config):
    """Creates a fresh directory `<output_dir>/<command>-<config digest>-<n>`.

    Returns:
        str: Path of the new directory; n counts earlier runs of the same config.
    """
    os.makedirs(output_dir, exist_ok=True)
    prefix = "{}-{}".format(command, config_digest(config))
    n = 0
    while os.path.exists(os.path.join(output_dir, "{}-{}".format(prefix, n))):
        n += 1
    run_dir = os.path.join(output_dir, "{}-{}".format(prefix, n))
    os.makedirs(run_dir)
    return run_dir


def _plain(value):
    """Converts numpy scalars and arrays, tuples and namedtuples to JSON types."""
    if hasattr(value, "_asdict"):
        return {k: _plain(v) for k, v in value._asdict().items()}
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


class RunRecord(object):
    """Config snapshot, code version, seed, stage timings, file manifest and fitted constants.

    Args:
        run_dir (str): Directory every artifact lives in.
        command (str): Subcommand that produced the run.
        config (ExperimentConfig): Resolved configuration.
    """

    def __init__(self, run_dir, command, config):
        self.run_dir = run_dir
        self.command = command
        self.config = config
        self.version = VERSION
        self.seed = config.seed
        self.timing = StageTimer()
        self.files = {}
        self.fits = {}
        self.error = None
        config.save(self.path(CONFIG_FILE))
        self.add_file(CONFIG_FILE)

    def path(self, name):
        return os.path.join(self.run_dir, name)

    def add_file(self, name):
        """Registers an artifact of the run directory with its SHA-256 checksum."""
        full = self.path(name)
        self.files[name] = {"sha256": sha256_of(full), "bytes": os.path.getsize(full)}
        return full

    def add_fit(self, name, value):
        """Stores fitted constants under `name` and appends them to fits.jsonl."""
        value = _plain(value)
        self.fits[name] = value
        with jsonlines.open(self.path(FITS_FILE), mode="a") as writer:
            writer.write({"name": name, "value": value})

    def fail(self, error):
        self.error = {"type": type(error).__name__, "message": str(error)}

    def to_dict(self):
        return {
            "command": self.command,
            "config": self.config.to_dict(),
            "version": self.version,
            "seed": self.seed,
            "timing": self.timing.as_dict(),
            "files": self.files,
            "fits": self.fits,
            "error": self.error,
        }

    def save(self):
        """Re-hashes fits.jsonl and writes run_record.json."""
        if os.path.exists(self.path(FITS_FILE)):
            self.add_file(FITS_FILE)
        with open(self.path(RECORD_FILE), "w", encoding="utf8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")
        logger.info("Run record written to {}".format(self.path(RECORD_FILE)))
        return self.path(RECORD_FILE)

    def verify_manifest(self):
        """Raises PropertyViolation if a listed file is missing or its checksum changed."""
        for name, entry in self.files.items():
            full = self.path(name)
            if not os.path.exists(full):
                raise PropertyViolation("Manifest file {} is missing".format(name))
            if sha256_of(full) != entry["sha256"]:
                raise PropertyViolation("Checksum of {} does not match the manifest".format(name))
        return True


def load_record(run_dir):
    with open(os.path.join(run_dir, RECORD_FILE), "r", encoding="utf8") as f:
        return json.load(f)
