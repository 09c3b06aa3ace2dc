import qpake
from setuptools import setup, find_packages

with open('README.md') as f:
    long_description = f.read()

setup(
	name = 'qpake',
	packages = find_packages(),
	package_data = {'qpake.testing': ['data/*']},
	version = qpake.__version__,
	description = 'Desk-scale simulator for password-authenticated quantum key exchange',
	long_description = long_description,
	long_description_content_type='text/markdown',
	license = 'BSD 2-Clause',
	install_requires = ['numpy>=1.22', 'scipy>=1.8', 'pycryptodome>=3.15'],
	extras_require = {'tables': ['pandas>=1.4']},
	entry_points = {'console_scripts': ['qpake = qpake.cli:main']},
	python_requires = '>=3.8',
	classifiers = [
		"Development Status :: 3 - Alpha",
		"Intended Audience :: Developers",
		"Intended Audience :: Science/Research",
		"Operating System :: OS Independent",
		"Programming Language :: Python",
		"Programming Language :: Python :: 3",
		"Programming Language :: Python :: 3.8",
		"Programming Language :: Python :: 3.9",
		"Programming Language :: Python :: 3.10",
		"Topic :: Scientific/Engineering",
		"Topic :: Security :: Cryptography"
	],
	platforms = 'any'
)
