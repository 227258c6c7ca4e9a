# coding=utf-8

# Copyright (C) 2026 pqc-backprop contributors
#
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 2 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.

"""
Seeded random streams.

All randomness goes through numpy's Philox4x64 counter-based generator, which
is specified independently of platform and library version. A stream is
addressed by a 64-bit seed and a 64-bit stream index; the Philox key is
``seed + (stream << 64)``. Stream 0 is the "main" stream of a seed, tree k of
a Monte-Carlo build uses stream k + 1.
"""

import numpy as np

from pqc_backprop.errors import ParameterError

_MASK64 = (1 << 64) - 1

# stream offsets so that independent consumers of one seed never collide
STREAM_MAIN = 0
STREAM_TREES = 1
STREAM_CONSTRAINT = 1 << 62
STREAM_ANGLES = (1 << 62) + 1
STREAM_INSTANCES = (1 << 62) + 2


def philox(seed, stream=STREAM_MAIN):
    """
    :param seed: non-negative integer below 2**64
    :param stream: non-negative integer below 2**64
    :return: numpy Generator on a Philox bit generator
    """
    if not 0 <= seed <= _MASK64:
        raise ParameterError("seed must lie in [0, 2**64), got {}".format(seed))
    if not 0 <= stream <= _MASK64:
        raise ParameterError("stream must lie in [0, 2**64)")
    return np.random.Generator(np.random.Philox(key=seed + (stream << 64)))


def tree_generator(seed, tree_index):
    """Generator of Monte-Carlo tree ``tree_index`` (0-based)."""
    return philox(seed, STREAM_TREES + tree_index)


def uniform_angles(seed, samples, m, stream=STREAM_ANGLES):
    """``samples`` x ``m`` angles drawn uniformly from [0, 2 pi)."""
    return philox(seed, stream).random((samples, m)) * (2.0 * np.pi)


def randrange(generator, upper):
    """Integer in [0, upper) from the integer path of the generator."""
    return int(generator.integers(0, upper))
