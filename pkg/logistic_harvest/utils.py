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
import time
from pathlib import Path

log = logging.getLogger(__name__)

def delete_file(file, attempts=5):
    """Delete ``file`` if it exists, retrying while it is held open elsewhere"""
    file = Path(file)
    for attempt in range(attempts):
        try:
            file.unlink()
        except FileNotFoundError:
            return
        except OSError as e:
            if attempt == attempts - 1:
                raise
            log.debug(f"Failed to delete file \"{file}\", reason: {e}. Trying... (attempt: {attempt})")
            time.sleep(attempt * 0.5)
        else:
            return

def is_strictly_decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))
