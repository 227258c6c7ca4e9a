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

from gettext import gettext as _


class PqcBackpropError(Exception):
    """
    Base class of all errors raised by pqc-backprop. The exit code is used by
    the command line interface.
    """
    exit_code = 2


class PauliParseError(PqcBackpropError, ValueError):
    def __init__(self, text, position):
        self.text = text
        self.position = position
        if position < len(text):
            found = repr(text[position])
        else:
            found = _("end of input")
        super(PauliParseError, self).__init__(
            _("invalid Pauli text {text!r}: unexpected {found} at index "
              "{position}").format(text=text, found=found, position=position))


class SchemaError(PqcBackpropError, ValueError):
    def __init__(self, path, message):
        self.path = path
        super(SchemaError, self).__init__("{}: {}".format(path, message))


class ParameterError(PqcBackpropError, ValueError):
    pass


class GraphGenerationError(PqcBackpropError):
    pass


class ModeError(PqcBackpropError):
    pass


class AdmissibilityError(PqcBackpropError):
    exit_code = 3


class CapabilityError(PqcBackpropError):
    exit_code = 3


class ResourceBudgetError(PqcBackpropError):
    exit_code = 4

    def __init__(self, budget_name, budget, message=""):
        self.budget_name = budget_name
        self.budget = budget
        text = _("{name} of {budget} exceeded").format(name=budget_name,
                                                        budget=budget)
        if message:
            text = "{}; {}".format(text, message)
        super(ResourceBudgetError, self).__init__(text)
