#!/usr/bin/python3 -Es
# coding=utf-8

# Copyright (C) 2017 Max Harmathy <max.harmathy@web.de>
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

from setuptools import setup

setup(
    name="pqc-backprop",
    version="0.1.0",
    description="Trigonometric surrogates of noisy Clifford+Rz circuits by "
                "Pauli backpropagation",
    license="GPL2+",
    packages=["pqc_backprop", "pqc_backprop.display"],
    package_data={"pqc_backprop": ["data/experiments.json"]},
    install_requires=["numpy>=1.17", "networkx>=2.4"],
    python_requires=">=3.8",
    entry_points={
        "console_scripts": [
            "pqc-backprop = pqc_backprop.main:command_line_interface",
        ],
    },
    test_suite="test",
)
