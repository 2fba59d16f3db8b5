# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

# Writes requirements.txt from the dependency table of generate_conda_file.py
# $ python generate_requirements_txt.py [--dev]

import argparse

from generate_conda_file import dependencies


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Generates requirements.txt for pip.")
    parser.add_argument("--dev", action="store_true", help="add the development tools")
    args = parser.parse_args()

    conda, pip = dependencies(args.dev)
    with open("requirements.txt", "w") as f:
        f.write("\n".join(sorted(conda + pip)))
        f.write("\n")
    print("Generated requirements.txt with {} packages".format(len(conda) + len(pip)))
