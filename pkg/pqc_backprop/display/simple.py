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

import logging
from sys import stderr

log = logging.getLogger(__name__)


class LinePrintInterface(object):
    """
    Progress lines for experiment sweeps. Writes to standard error so that
    standard output stays machine readable.
    """

    def __init__(self, stream=None, quiet=False):
        self.stream = stream or stderr
        self.quiet = quiet

    def update_task(self, percent, task, description):
        self.update(percent, "{} ({})".format(description, task))

    def update(self, percent, text=None):
        if not self.quiet:
            print("[{:5.1f}%] {}".format(percent, text or ""),
                  file=self.stream, flush=True)

    def debug(self, message):
        log.debug(message)

    def cleanup(self):
        self.stream.flush()
