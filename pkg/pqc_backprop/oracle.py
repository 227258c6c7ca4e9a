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
Dense reference simulators for small circuits.

``ptm_expectation`` propagates the observable's coefficient vector over the
4**n Pauli basis backwards through the circuit. The basis index of a string
is sum(letter_q * 4**q) with I=0, X=1, Y=2, Z=3. ``density_matrix_expectation``
runs the circuit forwards on a 2**n x 2**n density matrix with the channels'
Kraus operators; qubit 0 is the most significant bit of the matrix index.
"""

import logging
from functools import lru_cache

import numpy as np

from pqc_backprop.circuit import check_angles
from pqc_backprop.errors import CapabilityError, ParameterError, \
    ResourceBudgetError
from pqc_backprop.pauli import conjugate_layer_bits

log = logging.getLogger(__name__)

PTM_LIMIT = 7
DENSITY_LIMIT = 6
CHUNK = 512

# letter code -> (x, z) bit and back
_CODE_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))
_BITS_CODE = {bits: code for code, bits in enumerate(_CODE_BITS)}

_SQRT_HALF = np.sqrt(0.5)
_GATES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF,
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                   dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                     dtype=complex),
}
_PAULIS = {
    0: np.eye(2, dtype=complex),
    1: _GATES["X"],
    2: _GATES["Y"],
    3: _GATES["Z"],
}


def _check_size(n, limit, name):
    if n > limit:
        raise ResourceBudgetError(
            "{} qubit limit".format(name), limit,
            "circuit has {} qubits".format(n))


def basis_index(pauli):
    index = 0
    for q in range(pauli.n - 1, -1, -1):
        index = index * 4 + _BITS_CODE[(pauli.x >> q) & 1, (pauli.z >> q) & 1]
    return index


def _basis_bits(index, n):
    x = z = 0
    for q in range(n):
        x_bit, z_bit = _CODE_BITS[index % 4]
        x |= x_bit << q
        z |= z_bit << q
        index //= 4
    return x, z


@lru_cache(maxsize=256)
def clifford_permutation(layer, n):
    """
    (target, sign) arrays: basis string b maps to sign[b] * basis
    target[b] under the layer's adjoint action.
    """
    size = 4 ** n
    target = np.empty(size, dtype=np.int64)
    sign = np.empty(size)
    for index in range(size):
        x, z = _basis_bits(index, n)
        x, z, negative = conjugate_layer_bits(x, z, 0, layer)
        image = 0
        for q in range(n - 1, -1, -1):
            image = image * 4 + _BITS_CODE[(x >> q) & 1, (z >> q) & 1]
        target[index] = image
        sign[index] = -1.0 if negative else 1.0
    return target, sign


@lru_cache(maxsize=16)
def _diagonal_mask(n):
    """Basis strings made of I and Z only, whose |0...0> expectation is 1."""
    codes = np.arange(4 ** n)
    mask = np.ones(4 ** n, dtype=bool)
    for _ in range(n):
        mask &= (codes % 4 == 0) | (codes % 4 == 3)
        codes //= 4
    return mask


def _apply_clifford(vector, layer, n):
    target, sign = clifford_permutation(layer, n)
    result = np.empty_like(vector)
    result[target] = vector * sign[:, None]
    return result


def _apply_rotation(vector, noise, qubit, thetas, n):
    blocks = vector.reshape(4 ** (n - qubit - 1), 4, 4 ** qubit, -1)
    v_i, v_x, v_y, v_z = (blocks[:, k] for k in range(4))
    cos, sin = np.cos(thetas), np.sin(thetas)
    (tx, ty, tz), (dx, dy, dz) = noise.t, noise.D
    result = np.empty_like(blocks)
    result[:, 0] = v_i + tx * v_x + ty * v_y + tz * v_z
    result[:, 1] = dx * cos * v_x - dy * sin * v_y
    result[:, 2] = dx * sin * v_x + dy * cos * v_y
    result[:, 3] = dz * v_z
    return result.reshape(vector.shape)


def ptm_expectation_batch(circuit, observable, thetas, chunk=CHUNK):
    """
    Exact expectation values for the rows of an (M, m) angle array.
    """
    n = circuit.n
    _check_size(n, PTM_LIMIT, "transfer matrix oracle")
    if observable.n != n:
        raise ParameterError("observable has {} qubit(s), circuit has {}"
                             .format(observable.n, n))
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 2 or thetas.shape[1] != circuit.m:
        raise ParameterError("expected angle rows of length {}, got {}".format(
            circuit.m, thetas.shape))
    mask = _diagonal_mask(n)
    start = basis_index(observable)
    values = np.empty(thetas.shape[0])
    for offset in range(0, thetas.shape[0], chunk):
        batch = thetas[offset:offset + chunk]
        vector = np.zeros((4 ** n, batch.shape[0]))
        vector[start] = observable.sign
        for i in range(circuit.m - 1, -1, -1):
            layer = circuit.layers[i]
            vector = _apply_clifford(vector, layer.clifford, n)
            vector = _apply_rotation(vector, layer.noise,
                                     layer.rotation_qubit, batch[:, i], n)
        vector = _apply_clifford(vector, circuit.initial_clifford, n)
        values[offset:offset + batch.shape[0]] = vector[mask].sum(axis=0)
    return values


def ptm_expectation(circuit, observable, theta):
    """<0| C^dagger(O) |0> through the Pauli transfer matrices, n <= 7."""
    theta = check_angles(circuit, theta)
    return float(ptm_expectation_batch(circuit, observable, theta[None, :])[0])


def dense_reference(circuit, observable):
    """Batched evaluator for ``surrogate.empirical_l2``."""
    return lambda thetas: ptm_expectation_batch(circuit, observable, thetas)


def _apply_left(matrix, operator, qubits, n):
    """operator (on ``qubits``) times matrix, for a 2**n x 2**n matrix."""
    k = len(qubits)
    tensor = matrix.reshape((2,) * n + (2 ** n,))
    tensor = np.tensordot(operator.reshape((2,) * (2 * k)), tensor,
                          axes=(list(range(k, 2 * k)), list(qubits)))
    tensor = np.moveaxis(tensor, list(range(k)), list(qubits))
    return tensor.reshape(2 ** n, 2 ** n)


def _conjugate(rho, operators, qubits, n):
    """sum_K K rho K^dagger for Hermitian rho."""
    result = np.zeros_like(rho)
    for operator in operators:
        half = _apply_left(rho, operator, qubits, n)
        result += _apply_left(half.conj().T, operator, qubits, n)
    return result


def _check_physical(rho, step, tol=1e-10):
    trace = np.trace(rho).real
    if abs(trace - 1.0) > tol:
        raise ArithmeticError("trace {} after {}".format(trace, step))
    lowest = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0]
    if lowest < -tol:
        raise ArithmeticError("eigenvalue {} after {}".format(lowest, step))


def density_matrix_expectation(circuit, observable, theta,
                               check_physical=False):
    """
    tr(rho(theta) O) by forward simulation, n <= 6. Each layer applies
    exp(i theta Z / 2) on the rotation qubit, then its channel, then its
    Clifford layer.

    :param check_physical: verify trace one and positivity after every step
    :raises CapabilityError: for a channel without Kraus operators
    """
    n = circuit.n
    _check_size(n, DENSITY_LIMIT, "density matrix oracle")
    if observable.n != n:
        raise ParameterError("observable has {} qubit(s), circuit has {}"
                             .format(observable.n, n))
    theta = check_angles(circuit, theta)
    for i, layer in enumerate(circuit.layers, start=1):
        if layer.noise.kraus is None:
            raise CapabilityError(
                "layer {}: channel {} has no Kraus representation".format(
                    i, layer.noise))

    rho = np.zeros((2 ** n, 2 ** n), dtype=complex)
    rho[0, 0] = 1.0

    def clifford(rho, layer, step):
        for gate in layer:
            rho = _conjugate(rho, (_GATES[gate.kind],), gate.qubits, n)
        if check_physical:
            _check_physical(rho, step)
        return rho

    rho = clifford(rho, circuit.initial_clifford, "initial layer")
    for i, layer in enumerate(circuit.layers):
        qubit = (layer.rotation_qubit,)
        rotation = np.diag([np.exp(0.5j * theta[i]), np.exp(-0.5j * theta[i])])
        rho = _conjugate(rho, (rotation,), qubit, n)
        rho = _conjugate(rho, layer.noise.kraus, qubit, n)
        rho = clifford(rho, layer.clifford, "layer {}".format(i + 1))

    operator = np.array([[observable.sign]], dtype=complex)
    for q in range(n):
        code = _BITS_CODE[(observable.x >> q) & 1, (observable.z >> q) & 1]
        operator = np.kron(operator, _PAULIS[code])
    return float(np.trace(rho @ operator).real)
