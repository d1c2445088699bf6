from setuptools import setup, find_packages

__version__ = "1.0.0"

setup(
    name="bilap",
    version=__version__,
    description="Discrete spectrum of the lattice bilaplacian with a rank-one potential",
    license="MIT",
    classifiers=[
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "License :: OSI Approved :: MIT License",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    keywords="lattice bilaplacian rank-one perturbation eigenvalue threshold",
    packages=find_packages(exclude=["tests", "tests.*"]),
    zip_safe=False,
    platforms="any",
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.8",
        "ujson>=5.4",
    ],
    entry_points={"console_scripts": ["bilap=bilap.cli:main"]},
    tests_require=["pytest"],
    extras_require={"tests": "pytest"},
)
