# Copyright 2021-2026 pylbkld contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exceptions raised by pylbkld.

The command line maps any :class:`LbkldError` to exit code 1.
"""


class LbkldError(Exception):
    """Base class for all pylbkld errors."""


class DomainError(LbkldError, ValueError):
    """A model parameter or design lies outside its support."""


class ArgumentError(LbkldError, ValueError):
    """An estimator received unusable samples."""


class ConfigError(LbkldError, ValueError):
    """Invalid run or estimator configuration.

    :param message: The description.
    :param key: The dotted key path of the offending entry, if known.
    """

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f'{key}: {message}'
        super().__init__(message)


class InfeasibleConstraintError(ConfigError):
    """The cluster size constraint cannot be met: n < L * n_min."""


class CapabilityError(LbkldError, TypeError):
    """The model lacks a capability the estimator needs."""


class DivergenceError(LbkldError, RuntimeError):
    """The optimizer saw a non-finite utility.

    :param message: The description.
    :param trace: The iterate trace recorded before the abort.
    """

    def __init__(self, message, trace=None):
        self.trace = [] if trace is None else list(trace)
        super().__init__(message)
