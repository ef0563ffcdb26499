from setuptools import setup, find_packages

setup(
    name='pdmtools',
    version='0.1',
    packages=find_packages(exclude=['tests*']),
    license='Apache License v.2',
    description='Tools to forecast machine telemetry with an interleaved predictive GAN and BiLSTM',
    long_description=open('README.md').read(),
    install_requires=['numpy', 'scipy', 'matplotlib', 'pandas', 'scikit-image', 'scikit-learn'],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['forecaster = pdmtools.cli:main']},
)
