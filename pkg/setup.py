import setuptools
import os

setuptools.setup(
    name="egalitarian",
    version=os.environ.get('VERSION'),
    description="Measures how evenly cryptocurrency consensus mechanisms reward investors of different capital",
    packages=setuptools.find_packages(exclude=['tests']),
    package_data={'egalitarian': ['data/*.csv']},
    python_requires='>=3.8',
    install_requires=['numpy', 'pybnb'],
    entry_points={
        'console_scripts': [
            'egalitarian = egalitarian.cli:main',
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ]
)
