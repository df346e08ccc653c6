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


__version__ = "0.2.0"

__title__ = "pylbkld"
__description__ = 'Likelihood-free Bayesian experimental design with the LB-KLD utility'
__url__ = 'https://github.com/pylbkld/pylbkld'
__author__ = 'pylbkld contributors'
__author_email__ = 'pylbkld-dev@users.noreply.github.com'
__license__ = 'Apache 2.0'
__copyright__ = 'Copyright 2021-2026 pylbkld contributors'

__all__ = ['__version__', '__title__', '__description__', '__url__',
           '__author__', '__author_email__', '__license__',
           '__copyright__']
