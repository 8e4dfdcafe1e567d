from setuptools import find_packages, setup

setup(
    name="bellsim",
    version="0.1.0",
    description="Bell-CHSH simulator for local, quantum and time-ordered "
                "nonlocal models under before-before timing",
    packages=find_packages(include=["src", "src.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=2.1",
        "statsmodels>=0.14",
        "joblib>=1.4",
        "PyYAML>=6.0",
    ],
    extras_require={"test": ["pytest>=8.3", "hypothesis>=6.118"]},
    entry_points={"console_scripts": ["bellsim=src.cli:main"]},
)
