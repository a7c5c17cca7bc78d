'''Package settings'''

from setuptools import setup, find_packages, Command
from os.path import abspath, dirname, join
from subprocess import call
from codecs import open

from snce import __version__


this_dir = abspath(dirname(__file__))
with open(join(this_dir, 'README.md'), encoding='utf-8') as f:
	long_descr = f.read()

class run_tests(Command):
	''' Run all the tests '''
	description = 'tests'
	user_options = []

	def initialize_options(self):
		pass

	def finalize_options(self):
		pass

	def run(self):
		errno = call(['py.test', '--cov=snce', '--cov-report=term-missing'])
		raise SystemExit(errno)

setup(
    name='snce-lab',
    version=__version__,
	description = 'Stochastic neighbor cross entropy targets, losses and toy experiments for discrete generative models',
	long_description = long_descr,
	long_description_content_type = 'text/markdown',
	python_requires = '>=3.8',
    packages=find_packages(exclude=['tests', 'tests.*']),
    include_package_data=True,
    package_data={'snce.config': ['toy_default.json']},
    install_requires=[
		'Click>=7.0',
		'numpy>=1.17',
		'pandas>=1.0',
		'ruamel.yaml>=0.16',
		'scipy>=1.4'
    ],
	extras_require = {
		'test': ['coverage', 'pytest', 'pytest-cov']
	},
    entry_points='''
        [console_scripts]
        snce=snce.cli:cli
    ''',
	cmdclass = {'test': run_tests}
)
