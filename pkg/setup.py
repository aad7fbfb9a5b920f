#!/usr/bin/env python
#
# Copyright (c) 2025 TUM Department of Electrical and Computer Engineering.
#
# This file is part of simulband.
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
#

"""The setup script."""

from setuptools import setup, find_packages
from simulband.version import __version__


with open("README.md") as readme_file:
    readme = readme_file.read()


def get_requirements():
    with open("requirements.txt") as req_file:
        return [line.strip() for line in req_file if line.strip() and not line.startswith("#")]


requirements = get_requirements()

setup(
    author="TUM Department of Electrical and Computer Engineering",
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 2 - Pre-Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    description="simulband - Simultaneous confidence regions for parameters estimated by M-estimation",
    entry_points={
        "console_scripts": [
            "simulband=simulband.cli.main:main",
        ],
    },
    install_requires=requirements,
    extras_require={"dev": ["pytest", "black>=22.8.0", "flake8", "pylint"]},
    license="Apache License 2.0",
    long_description=readme,
    long_description_content_type="text/markdown",
    include_package_data=True,
    keywords="simulband,m-estimation,confidence-bands,sup-t,causal-inference",
    name="simulband",
    packages=find_packages(include=["simulband", "simulband.*"]),
    package_data={
        "simulband.resources.presets": ["*.yml"],
        "simulband.backends.svg.templates": ["*.mako"],
    },
    test_suite="tests",
    tests_require=requirements + ["pytest"],
    version=__version__,
    zip_safe=False,
)
