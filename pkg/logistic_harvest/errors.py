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

class HarvestException(Exception):
    """Base exception for logistic-harvest errors"""
    exit_code = 1

class InvalidArgument(HarvestException, ValueError):
    """Raised when an operation receives arguments outside its domain"""
    exit_code = 2

class ConfigTypeError(HarvestException):
    """Raised when a run config key is unknown or has an invalid value"""
    exit_code = 2

class DomainError(HarvestException, ArithmeticError):
    """Raised when the boundary map is evaluated where it is undefined
    (negative boundary values, or a derivative at zero when ``alpha = 0``)"""
    exit_code = 3

class NumericFailure(HarvestException):
    """Raised when an eigensolver or a linear solve fails"""
    exit_code = 3

    def __init__(self, *args: object, iterations=None) -> None:
        self.iterations = iterations
        super().__init__(*args)

class NonConvergence(HarvestException):
    """Raised when an iterative solver exhausts its iteration budget

    The best iterate found so far is available as :attr:`iterate`.
    """
    exit_code = 3

    def __init__(self, *args: object, iterate=None, residual_norm=None) -> None:
        self.iterate = iterate
        self.residual_norm = residual_norm
        super().__init__(*args)

class MonotonicityFailure(HarvestException):
    """Raised when monotone iterates lose their ordering (constants K or M too small)"""
    exit_code = 3

    def __init__(self, *args: object, iterates=None) -> None:
        self.iterates = iterates
        super().__init__(*args)

class EstimationFailure(HarvestException):
    """Raised when the trivial-line contact of a limit branch cannot be located"""
    exit_code = 3

class TopologyFailure(HarvestException):
    """Raised when a traced continuum does not connect the expected endpoints"""
    exit_code = 4

    def __init__(self, *args: object, branch=None) -> None:
        self.branch = branch
        super().__init__(*args)

class PartialBranch(HarvestException):
    """Raised when the corrector keeps failing and only part of a branch was traced"""
    exit_code = 4

    def __init__(self, *args: object, branch=None) -> None:
        self.branch = branch
        super().__init__(*args)

class VerificationFailure(HarvestException):
    """Raised when a verification scenario has a failing property"""
    exit_code = 5

    def __init__(self, *args: object, report=None) -> None:
        self.report = report
        super().__init__(*args)

class InvalidFormat(HarvestException):
    """Raised when an unknown output format is requested"""
    exit_code = 2
