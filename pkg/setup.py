import codecs
from setuptools import setup, find_packages
extra_setup = dict(
install_requires=[
    'PyYAML',
    'wheel>=0.24.0',
    'numpy>=1.17',
    'scipy>=1.4',
],
extras_require={'docs': ['sphinx', 'sphinx_rtd_theme']},
setup_requires=['pytest-runner'],
tests_require=['pytest', 'mock'],
)

setup(
    name='lqg-feedback',
    version='0.1.0',
    description='LQG feedback code for the Gaussian broadcast channel: solver, simulator and experiments',
    long_description=codecs.open('README.rst', encoding='utf-8').read(),
    package_dir={'': '.'},
    packages=find_packages('.', exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    include_package_data=True,
    entry_points={
        'console_scripts': [
            'lqg-feedback=lqg_feedback.cli:main',
        ],
    },
    **extra_setup
)
