from setuptools import setup, find_packages

setup(
    name="vg-equations",
    version="0.1.0",
    description="Variance Gamma process numerics: densities, Weyl operators, equation checks and samplers",
    license="MIT",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.20.0",
        "scipy>=1.7.0",
        "pyyaml>=6.0",
        "argcomplete>=2.0.0",
    ],
    entry_points={
        "console_scripts": [
            "vg-equations=vg_equations.cli:main",
        ],
    },
)
