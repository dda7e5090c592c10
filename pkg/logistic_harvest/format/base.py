# MIT License

# Copyright (c) 2026 logistic-harvest developers

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

import logging
import os
from pathlib import Path

from pathvalidate import sanitize_filename

from ..utils import delete_file

log = logging.getLogger(__name__)

class BaseFormat:
    """Writes one kind of output file into ``path``

    Files are first written to ``<name>.temp`` and then renamed over the
    target, so an interrupted run never leaves a truncated file behind.
    """
    extension = None

    def __init__(self, path):
        self.path = Path(path)

    def render(self, data):
        raise NotImplementedError

    def get_file(self, name):
        name = sanitize_filename(name)
        if self.extension and not name.endswith(self.extension):
            name += self.extension
        return self.path / name

    def write(self, name, data):
        file = self.get_file(name)
        temp = Path(str(file) + '.temp')
        self.path.mkdir(parents=True, exist_ok=True)

        content = self.render(data)
        if isinstance(content, str):
            content = content.encode('utf-8')

        try:
            with open(temp, 'wb') as writer:
                writer.write(content)
            os.replace(temp, file)
        except BaseException:
            delete_file(temp)
            raise

        log.debug(f"Wrote {file}")
        return file
