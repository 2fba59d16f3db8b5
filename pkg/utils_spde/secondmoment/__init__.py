# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.
