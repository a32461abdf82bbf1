from setuptools import setup, find_packages


def readme():
    with open('README.md') as f:
        return f.read()


NAME = 'bipartite'
VERSION = '1.0.dev0'
DESCRIPTION = 'Simulation and analysis of bipartite wave functions on a 1D grid.'
LONG_DESCRIPTION = readme()
AUTHOR = 'Ben Corcoran'

with open('requirements.txt') as f:
    INSTALL_REQUIRES = f.read().splitlines()


setup(name=NAME,
      version=VERSION,
      description=DESCRIPTION,
      long_description=LONG_DESCRIPTION,
      long_description_content_type='text/markdown',
      author=AUTHOR,
      packages=find_packages(exclude=['tests']),
      package_data={'bipartite': ['templates/*.txt', 'templates/*.md']},
      install_requires=INSTALL_REQUIRES,
      extras_require={'test': ['pytest']},
      entry_points={'console_scripts': ['bipartite = bipartite.__main__:main']},
      python_requires='>=3.7',
      include_package_data=True,
      zip_safe=False)
