# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

#!/usr/bin/env python
# -*- encoding: utf-8 -*-
import io
import re
from os.path import dirname, join

from setuptools import find_packages, setup

from utils_spde import AUTHOR, LICENSE, TITLE, VERSION


def read(*names, **kwargs):
    with io.open(join(dirname(__file__), *names), encoding=kwargs.get("encoding", "utf8")) as fh:
        return fh.read()


setup(
    name="utils_spde",
    version=VERSION,
    license=LICENSE,
    description="{}: numerical experiments on the fractional stochastic heat equation "
    "on an interval: Monte Carlo moments, deterministic second-moment oracles and "
    "heat-kernel certification".format(TITLE),
    long_description="%s\n%s"
    % (
        re.compile("^.. start-badges.*^.. end-badges", re.M | re.S).sub("", read("README.md")),
        re.sub(":[a-z]+:`~?(.*?)`", r"``\1``", read("CONTRIBUTING.md")),
    ),
    long_description_content_type="text/markdown",
    author=AUTHOR,
    packages=find_packages(include=["utils_spde", "utils_spde.*"]),
    include_package_data=True,
    zip_safe=True,
    classifiers=[
        # complete classifier list: http://pypi.python.org/pypi?%3Aaction=list_classifiers
        "Development Status :: 4 - Beta",
        "License :: OSI Approved :: MIT License",
        "Operating System :: Unix",
        "Operating System :: POSIX",
        "Operating System :: Microsoft :: Windows",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Intended Audience :: Science/Research",
        "Intended Audience :: Education",
    ],
    keywords=[
        "stochastic heat equation",
        "fractional Laplacian",
        "intermittency",
        "Lyapunov exponent",
        "Monte Carlo",
        "Volterra equation",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.12",
        "pandas>=1.5",
        "matplotlib>=3.5",
        "tqdm>=4.32.2",
        "cached-property>=1.5.1",
        "jsonlines>=1.2.0",
        "mpmath>=1.2",
    ],
    extras_require={"dev": ["pytest>=7.0", "black>=22.3"]},
    entry_points={"console_scripts": ["spde-lab=utils_spde.cli.runner:main"]},
)
