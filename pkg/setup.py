#!/usr/bin/env python
#
# Copywright (C) 2024 shark-utilities developers
# LICENSE: MIT License

from setuptools import setup
from setuptools import find_packages

import linslam

setup(
    name = "LinSLAM",
    version = linslam.__version__,
    author = "shark-utilities developers",
    author_email = "neuralNOD@outlook.com",
    description = "Large scale SLAM by joining local maps with linear least squares and closed form frame transforms.",
    long_description = open("README.md", "r").read(),
    long_description_content_type = "text/markdown",
    url = "https://github.com/sharkutilities/LinSLAM",
    packages = find_packages(exclude = ["tests", "tests.*"]),
    install_requires = [
        "numpy",
        "scipy",
        "PyYAML"
    ],
    extras_require = {
        # ? sparse cholesky factorization, falls back to scipy splu when missing
        "cholmod" : ["scikit-sparse"],
        "test" : ["pytest"]
    },
    entry_points = {
        "console_scripts" : ["linslam = linslam.cli:main"]
    },
    classifiers = [
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Developers",
        "Intended Audience :: Education",
        "Intended Audience :: Science/Research",
        "Operating System :: Unix",
        "Operating System :: POSIX",
        "Operating System :: Microsoft :: Windows",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering",
        "License :: OSI Approved :: MIT License"
    ],
    project_urls = {
        "Issue Tracker" : "https://github.com/sharkutilities/LinSLAM/issues",
        "Org. Homepage" : "https://github.com/sharkutilities"
    },
    keywords = [
        # keywords for finding the package::
        "slam", "mapping", "robotics", "least-squares", "map-joining",
        "submap", "pose-graph", "sparse", "localization",
        # keywords for finding the package relevant to usecases::
        "simulation", "evaluation", "data science", "research"
    ],
    python_requires = ">=3.8"
)
