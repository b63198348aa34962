from setuptools import setup, find_packages

setup(
    name="beamgan",
    version="0.1.0",
    description="Generative beamspace mmWave MIMO channel estimation from noisy pilots",
    author="beamgan Engineering Team",
    packages=find_packages(include=["src", "src.*"]),
    package_data={"": ["*.yaml"]},
    python_requires=">=3.10",
    install_requires=[
        "python-dotenv",
        "numpy",
        "scipy",
        "pandas",
        "xarray",
        "torch",
        "matplotlib",
        "pydantic>=2",
        "pydantic-settings",
        "PyYAML",
        "python-json-logger",
        "tenacity",
    ],
    entry_points={
        "console_scripts": ["beamgan=src.cli.main:main"],
    },
)
