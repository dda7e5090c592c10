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

import csv
import io
import math

import numpy as np

from .base import BaseFormat

def format_value(value):
    """Shortest round-trip text of a cell

    Sequences are joined with ``;``, commas in text are replaced.
    """
    if value is None:
        return ""
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(format_value(i) for i in value)
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    try:
        return repr(float(value))
    except (TypeError, ValueError):
        return str(value).replace(",", ";")

class CsvFormat(BaseFormat):
    """Comma separated table, ``data = (header, rows)``"""
    extension = '.csv'

    def render(self, data):
        header, rows = data
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([format_value(i) for i in row] for row in rows)
        return buffer.getvalue()

def read_csv(path):
    """Read back a numeric table written by :class:`CsvFormat`

    Returns
    --------
    Tuple[List[:class:`str`], List[List[:class:`float`]]]
    """
    with open(path, 'r', encoding='utf-8', newline='') as reader:
        header, *rows = csv.reader(reader)

    return header, [[float(i) for i in row] for row in rows if row]
