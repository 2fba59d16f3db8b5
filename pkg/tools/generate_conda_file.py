#!/usr/bin/python

# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

# Writes the conda environment file of the lab.
# $ python generate_conda_file.py
# $ python generate_conda_file.py --name spde_dev --dev


import argparse
import textwrap


HELP_MSG = """
To create the conda environment:
$ conda env create -f {conda_env}.yaml

To update the conda environment:
$ conda env update -f {conda_env}.yaml

To install the package and the spde-lab command into it:
$ conda activate {conda_env}
$ pip install -e .
"""

CHANNELS = ["conda-forge", "defaults"]

# Keep in sync with install_requires in setup.py.
CONDA_RUNTIME = {
    "matplotlib": "matplotlib>=3.5",
    "mpmath": "mpmath>=1.2",
    "numpy": "numpy>=1.21",
    "pandas": "pandas>=1.5",
    "scipy": "scipy>=1.12",
}

PIP_RUNTIME = {
    "cached-property": "cached-property>=1.5.1",
    "jsonlines": "jsonlines>=1.2.0",
    "tqdm": "tqdm>=4.32.2",
}

CONDA_DEV = {"pytest": "pytest>=7.0"}

PIP_DEV = {
    "black": "black>=22.3",
    "pre-commit": "pre-commit>=1.14.4",
}

PYTHON = "python>=3.9"
PIP = "pip>=19.1.1"


def dependencies(dev=False):
    """Returns (conda specs, pip specs), sorted by package name."""
    conda, pip = dict(CONDA_RUNTIME), dict(PIP_RUNTIME)
    if dev:
        conda.update(CONDA_DEV)
        pip.update(PIP_DEV)
    return [conda[k] for k in sorted(conda)], [pip[k] for k in sorted(pip)]


def render(conda_env, dev=False):
    conda, pip = dependencies(dev)
    lines = ["# {}".format(line) for line in HELP_MSG.format(conda_env=conda_env).split("\n")]
    lines += ["name: {}".format(conda_env), "channels:"]
    lines += ["- {}".format(channel) for channel in CHANNELS]
    lines += ["dependencies:", "- {}".format(PYTHON), "- {}".format(PIP)]
    lines += ["- {}".format(spec) for spec in conda]
    lines += ["- pip:"] + ["  - {}".format(spec) for spec in pip]
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    parser = argparse.ArgumentParser(
        description=textwrap.dedent(
            """
        Generates the conda file of the SPDE lab environment. The lab runs on CPU
        only, so the same file serves Linux, macOS and Windows."""
        ),
        epilog=HELP_MSG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--name", default="spde_lab", help="name of the conda environment")
    parser.add_argument("--dev", action="store_true", help="add pytest, black and pre-commit")
    args = parser.parse_args()

    conda_file = "{}.yaml".format(args.name)
    with open(conda_file, "w") as f:
        f.write(render(args.name, args.dev))

    print("Generated conda file: {}".format(conda_file))
    print(HELP_MSG.format(conda_env=args.name))
