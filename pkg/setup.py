#!/usr/bin/env python
import os
from setuptools import setup, find_packages


def read(fname: str) -> str:
    """Open files relative to package."""
    return open(os.path.join(os.path.dirname(__file__), fname)).read()


setup(
    name='snowsca',
    version='0.1.0',
    description=(
        'SNOW-V reference cipher with side-channel leakage simulation, '
        'TVLA, CPA and LDA key recovery tooling'
    ),
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    license='MIT',
    packages=find_packages(exclude=['tests']),
    python_requires='>=3.8',
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Security :: Cryptography',
    ],
    install_requires=[
        'numpy',
        'matplotlib',
        'boto3'
    ],
    extras_require={
        'test': ['pytest', 'scipy'],
    },
    entry_points={
        'console_scripts': ['snowsca=snowsca.cli:main'],
    }
)
