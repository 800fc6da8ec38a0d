import os
from pathlib import Path
from typing import List

from setuptools import find_namespace_packages, setup


test_requirements = ["pytest", "coverage"]
develop_requirements = test_requirements + ["pre-commit"]

extras_requires = {
    "test": test_requirements,
    "develop": develop_requirements,
}

requirements: List[str] = [
    "click",
    "gitpython",
    "netCDF4",
    "numpy",
    "pandas",
    "pyyaml",
    "scipy",
    "xarray",
]

setup(
    author = "kinopt developers",
    python_requires=">=3.10",
    classifiers="",
    install_requires=requirements,
    extras_require=extras_requires,
    name="kinopt",
    license="",
    packages=find_namespace_packages(include=["kinopt", "kinopt.*"]),
    include_package_data=True,
    version="0.0.1",
    zip_safe=False,
    entry_points={"console_scripts": ["kinopt = kinopt.main:main"]},
)
