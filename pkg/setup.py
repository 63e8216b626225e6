from setuptools import setup, find_packages

setup(
    name="knockoffkit",
    version="0.1.0",
    description="Gaussian model-X knockoffs at scale",
    author="",
    author_email="",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    python_requires=">=3.10",
    install_requires=[
        "pydantic>=2.0.0",
        "pydantic-settings>=2.0.0",
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "numba>=0.57.0",
        "scikit-learn>=1.3.0",
        "joblib>=1.3.0",
        "typer>=0.9.0",
        "rich>=13.0.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "hypothesis>=6.80.0",
            "black>=23.0.0",
            "flake8>=6.0.0",
            "mypy>=1.0.0",
        ],
    },
    entry_points={
        "console_scripts": ["knockoffkit=knockoffkit.main:app"],
    },
)
