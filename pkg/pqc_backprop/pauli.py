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
Signed Pauli strings in bit-pair encoding and their Heisenberg-picture
conjugation through the Clifford gates H, S, SDG, X, Y, Z, CX, CZ and SWAP.

Bit q of ``x`` and ``z`` describes qubit q: (0,0)=I, (1,0)=X, (1,1)=Y,
(0,1)=Z. In the text form character q is qubit q.
"""

from dataclasses import dataclass, field
from functools import cached_property

from pqc_backprop.errors import PauliParseError, SchemaError

LETTERS = "IXYZ"

SINGLE_QUBIT_GATES = ("H", "S", "SDG", "X", "Y", "Z")
TWO_QUBIT_GATES = ("CX", "CZ", "SWAP")
GATE_KINDS = SINGLE_QUBIT_GATES + TWO_QUBIT_GATES

_MINUS_SIGNS = ("-", "−")


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a Pauli string needs at least one qubit")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if (self.x | self.z) >> self.n:
            raise ValueError("bits set beyond qubit {}".format(self.n - 1))

    @classmethod
    def identity(cls, n):
        return cls(n)

    @classmethod
    def single(cls, n, qubit, letter, sign=1):
        x_bit, z_bit = _letter_bits(letter)
        return cls(n, x_bit << qubit, z_bit << qubit, sign)

    def axis(self, qubit):
        return pauli_axis(self, qubit)

    @property
    def is_identity(self):
        return not (self.x | self.z)

    @property
    def is_diagonal(self):
        """True if every qubit carries I or Z."""
        return not self.x

    @property
    def weight(self):
        return bin(self.x | self.z).count("1")

    @property
    def x_bits(self):
        return [(self.x >> q) & 1 for q in range(self.n)]

    @property
    def z_bits(self):
        return [(self.z >> q) & 1 for q in range(self.n)]

    def zero_state_expectation(self):
        """<0...0| P |0...0>"""
        return self.sign if not self.x else 0

    def __str__(self):
        return format_pauli(self)


@dataclass(frozen=True)
class CliffordGate:
    kind: str
    qubits: tuple

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if kind not in GATE_KINDS:
            raise ValueError("unknown gate {!r}".format(self.kind))
        arity = 1 if kind in SINGLE_QUBIT_GATES else 2
        if len(self.qubits) != arity:
            raise ValueError("gate {} acts on {} qubit(s), got {}".format(
                kind, arity, list(self.qubits)))
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index in {}".format(kind))
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError("gate {} needs distinct qubits".format(kind))

    def check(self, n):
        if max(self.qubits) >= n:
            raise IndexError("gate {} on qubits {} exceeds {} qubit(s)".format(
                self.kind, list(self.qubits), n))

    def to_json(self):
        return {"gate": self.kind, "qubits": list(self.qubits)}

    @classmethod
    def from_json(cls, data, path="gate"):
        if not isinstance(data, dict):
            raise SchemaError(path, "expected an object")
        for key in ("gate", "qubits"):
            if key not in data:
                raise SchemaError("{}.{}".format(path, key), "missing")
        if not isinstance(data["qubits"], list) or not all(
                isinstance(q, int) and not isinstance(q, bool)
                for q in data["qubits"]):
            raise SchemaError(path + ".qubits", "expected a list of integers")
        try:
            return cls(str(data["gate"]), tuple(data["qubits"]))
        except ValueError as error:
            raise SchemaError(path, str(error))


@dataclass(frozen=True)
class CliffordLayer:
    """Gates in Schroedinger order: the first gate acts first on the state."""
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def check(self, n):
        for gate in self.gates:
            gate.check(n)

    def inverse(self):
        """Layer implementing the inverse unitary."""
        inverted = []
        for gate in reversed(self.gates):
            kind = {"S": "SDG", "SDG": "S"}.get(gate.kind, gate.kind)
            inverted.append(CliffordGate(kind, gate.qubits))
        return CliffordLayer(tuple(inverted))

    @cached_property
    def heisenberg_ops(self):
        """Compiled (kind, a, b) tuples in backpropagation order."""
        ops = []
        for gate in reversed(self.gates):
            a = gate.qubits[0]
            b = gate.qubits[1] if len(gate.qubits) > 1 else -1
            ops.append((gate.kind, a, b))
        return tuple(ops)

    def to_json(self):
        return [gate.to_json() for gate in self.gates]

    @classmethod
    def from_json(cls, data, path="layer"):
        if not isinstance(data, list):
            raise SchemaError(path, "expected a list of gates")
        return cls(tuple(CliffordGate.from_json(item, "{}[{}]".format(path, i))
                         for i, item in enumerate(data)))


def _letter_bits(letter):
    try:
        index = LETTERS.index(letter)
    except ValueError:
        raise ValueError("unknown Pauli letter {!r}".format(letter))
    return (0, 1, 1, 0)[index], (0, 0, 1, 1)[index]


def conjugate_bits(x, z, negative, kind, a, b=-1):
    """
    Heisenberg update g^dagger P g on raw masks. ``negative`` is 1 for a
    minus sign. Returns the new (x, z, negative).
    """
    bit_a = 1 << a
    xa = (x >> a) & 1
    za = (z >> a) & 1
    if kind == "H":
        negative ^= xa & za
        if xa != za:
            x ^= bit_a
            z ^= bit_a
    elif kind == "S":
        negative ^= xa & (za ^ 1)
        if xa:
            z ^= bit_a
    elif kind == "SDG":
        negative ^= xa & za
        if xa:
            z ^= bit_a
    elif kind == "X":
        negative ^= za
    elif kind == "Y":
        negative ^= xa ^ za
    elif kind == "Z":
        negative ^= xa
    else:
        bit_b = 1 << b
        xb = (x >> b) & 1
        zb = (z >> b) & 1
        if kind == "CX":
            # a is the control, b the target
            negative ^= xa & zb & (xb ^ za ^ 1)
            if xa:
                x ^= bit_b
            if zb:
                z ^= bit_a
        elif kind == "CZ":
            negative ^= xa & xb & (za ^ zb)
            if xb:
                z ^= bit_a
            if xa:
                z ^= bit_b
        elif kind == "SWAP":
            if xa != xb:
                x ^= bit_a | bit_b
            if za != zb:
                z ^= bit_a | bit_b
        else:
            raise ValueError("unknown gate {!r}".format(kind))
    return x, z, negative


def conjugate_layer_bits(x, z, negative, layer):
    for kind, a, b in layer.heisenberg_ops:
        x, z, negative = conjugate_bits(x, z, negative, kind, a, b)
    return x, z, negative


def conjugate_gate(p, gate):
    """
    Return gate^dagger p gate.
    :raises IndexError: if the gate touches a qubit outside of p
    """
    gate.check(p.n)
    b = gate.qubits[1] if len(gate.qubits) > 1 else -1
    x, z, negative = conjugate_bits(p.x, p.z, int(p.sign < 0), gate.kind,
                                    gate.qubits[0], b)
    return PauliString(p.n, x, z, -1 if negative else 1)


def conjugate_layer(p, layer):
    """
    Backpropagate p through a Schroedinger-ordered layer, last gate first.
    """
    layer.check(p.n)
    x, z, negative = conjugate_layer_bits(p.x, p.z, int(p.sign < 0), layer)
    return PauliString(p.n, x, z, -1 if negative else 1)


def pauli_axis(p, qubit):
    if not 0 <= qubit < p.n:
        raise IndexError("qubit {} outside of {} qubit(s)".format(qubit, p.n))
    return LETTERS[axis_index(p.x, p.z, qubit)]


def axis_index(x, z, qubit):
    """Index into LETTERS of the Pauli on one qubit."""
    return (0, 1, 3, 2)[((x >> qubit) & 1) | (((z >> qubit) & 1) << 1)]


def parse_pauli(text):
    """
    Parse an optionally signed string over I, X, Y, Z.
    :raises PauliParseError: with the index of the first offending character
    """
    negative = False
    start = 0
    if text[:1] == "+":
        start = 1
    elif text[:1] in _MINUS_SIGNS:
        negative = True
        start = 1
    if start == len(text):
        raise PauliParseError(text, start)
    x = z = 0
    for position in range(start, len(text)):
        letter = text[position]
        if letter not in LETTERS:
            raise PauliParseError(text, position)
        x_bit, z_bit = _letter_bits(letter)
        qubit = position - start
        x |= x_bit << qubit
        z |= z_bit << qubit
    return PauliString(len(text) - start, x, z, -1 if negative else 1)


def format_pauli(p):
    letters = "".join(LETTERS[axis_index(p.x, p.z, q)] for q in range(p.n))
    return ("-" if p.sign < 0 else "") + letters
