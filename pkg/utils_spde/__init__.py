# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

__title__ = "SPDE Lab"
__author__ = "SPDE Lab contributors"
__license__ = "MIT"
__copyright__ = "Copyright 2024-present SPDE Lab contributors"
__version__ = "0.3.0"

# Synonyms
TITLE = __title__
AUTHOR = __author__
LICENSE = __license__
COPYRIGHT = __copyright__
VERSION = __version__
