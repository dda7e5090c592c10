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

import argparse
import logging
import sys
from gettext import gettext

from .command import commands
from .utils import get_key_value, print_version_info
from .. import __description__

log = logging.getLogger(__name__)

class ModifiedArgumentParser(argparse.ArgumentParser):
    """Modified :class:`argparse.ArgumentParser`

    The only thing modified is :meth:`argparse.ArgumentParser.error()` function.
    The function should not show whole usage, instead just show the error for simplicity.
    """
    def error(self, message):
        self.exit(2, f'Error: {gettext(message)}\n')

class PrintVersionAction(argparse.Action):
    def __call__(self, *args, **kwargs):
        print_version_info()
        sys.exit(0)

def validate_override(text):
    key, value = get_key_value(text)
    if not key or not value:
        raise argparse.ArgumentTypeError(f"'{text}' is not in KEY=VALUE form")
    return key, value

def get_args(argv):
    parser = ModifiedArgumentParser(
        prog='harvest',
        description=__description__
    )
    parser.add_argument(
        'command',
        choices=list(commands.keys()),
        help='Computation to run'
    )
    parser.add_argument(
        '--config',
        '-c',
        required=True,
        metavar='PATH',
        help='Run config, one "key = value" per line'
    )
    parser.add_argument(
        '--out',
        '-o',
        metavar='DIR',
        help='Output directory, overrides the "out" config key and HARVEST_OUTPUT_DIR',
        default=None
    )
    parser.add_argument(
        '--set',
        '-s',
        metavar='KEY=VALUE',
        type=validate_override,
        action='append',
        default=[],
        help='Override a config key, can be given multiple times'
    )
    parser.add_argument(
        '--no-progress-bar',
        '-npb',
        action='store_true',
        help='Disable progress bars'
    )
    parser.add_argument('--verbose', help='Enable verbose output', action='store_true')
    parser.add_argument(
        '--version',
        '-v',
        action=PrintVersionAction,
        nargs=0,
        help='Print version, Python, numpy and scipy info and exit'
    )

    args = parser.parse_args(argv)
    return parser, args
