#!/usr/bin/env python3
# Inspired from https://github.com/kennethreitz/setup.py

from pathlib import Path
from setuptools import setup

NAME = "boxprewavelets"
DESCRIPTION = "Exact box spline prewavelet construction with certified torus bounds"
AUTHOR = "boxprewavelets developers"
REQUIRES_PYTHON = ">=3.9.0"
VERSION = "0.1.0"

HERE = Path(__file__).parent

try:
    with open(HERE / "README.md", encoding="utf-8") as f:
        long_description = "\n" + f.read()
except FileNotFoundError:
    long_description = DESCRIPTION

setup(
    name=NAME,
    version=VERSION,
    description=DESCRIPTION,
    long_description=long_description,
    long_description_content_type="text/markdown",
    author=AUTHOR,
    python_requires=REQUIRES_PYTHON,
    packages=["boxprewavelets"],
    install_requires=["torch", "scipy", "numpy", "sympy>=1.9"],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["boxprew=boxprewavelets.cli:main"]},
    include_package_data=True,
    license="Apache License 2.0",
    classifiers=[
        "License :: OSI Approved :: Apache Software License",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
