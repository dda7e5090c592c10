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

from .base import BaseFormat
from .table import format_value

class PlotFormat(BaseFormat):
    """Whitespace separated columns, ``data = (labels, rows)``"""
    extension = '.dat'

    def render(self, data):
        labels, rows = data
        lines = ["# " + " ".join(labels)]
        for row in rows:
            lines.append(" ".join(format_value(i) for i in row))
        return "\n".join(lines) + "\n"

class GnuplotFormat(BaseFormat):
    """gnuplot script for a ``.dat`` file, ``data = (datafile, xlabel, ylabel, title)``"""
    extension = '.gp'

    def render(self, data):
        datafile, xlabel, ylabel, title = data
        return "\n".join([
            "set terminal pngcairo size 800,600",
            f"set output '{datafile}.png'",
            f"set xlabel '{xlabel}'",
            f"set ylabel '{ylabel}'",
            "set grid",
            f"plot '{datafile}' using 1:2 with linespoints pt 7 ps 0.4 title '{title}'",
            "",
        ])
