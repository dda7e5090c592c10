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
import sys
import traceback
from pathlib import Path

from .args_parser import get_args
from .command import commands
from .utils import register_keyboardinterrupt_handler, setup_logging, sys_argv
from ..config import env, load_config
from ..errors import HarvestException

log = logging.getLogger(__name__)

def build_config(args):
    cfg = load_config(args.config)
    for key, value in args.set:
        cfg.write(key, value)
    if args.no_progress_bar:
        cfg.write('no_progress_bar', True)

    return cfg.validate()

def get_output_dir(args, cfg):
    if args.out:
        return Path(args.out)
    elif cfg.out:
        return Path(cfg.out)
    return Path(env.output_dir)

def _main(argv):
    parser = None
    try:
        # Signal handler
        register_keyboardinterrupt_handler()

        # Get command-line arguments
        parser, args = get_args(argv)

        # Setup logging
        setup_logging('logistic_harvest', args.verbose)

        # Parse and validate config before dispatch
        cfg = build_config(args)
        out = get_output_dir(args, cfg)

        log.info(f"Running '{args.command}', writing to '{out}'")
        commands[args.command](cfg, out)

    # library error
    except HarvestException as e:
        err_msg = str(e)
        return parser, e.exit_code, err_msg

    # Other exception
    except Exception as e:
        log.error("Unhandled exception, %s: %s" % (e.__class__.__name__, str(e)))
        traceback.print_exception(type(e), e, e.__traceback__, file=sys.stderr)
        return parser, 1, None

    else:
        return parser, 0, None

def main(argv=None):
    _argv = sys_argv if argv is None else argv

    args_parser, exit_code, err_msg = _main(_argv)

    if args_parser is not None and exit_code > 0 and err_msg:
        args_parser.exit(exit_code, f'Error: {err_msg}\n')

    sys.exit(exit_code)
