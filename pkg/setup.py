import os

readme = os.path.join(os.path.dirname(__file__), 'README.rst')
long_description = open(readme).read()


SETUP_ARGS = dict(
    name='django-improvr',
    version='0.1.0',
    description=('Learns arrangement tasks from demonstrations and improvises '
        'plans for them with Monte Carlo tree search'),
    long_description=long_description,
    url='https://github.com/cltrudeau/django-improvr',
    author='Christopher Trudeau',
    author_email='ctrudeau+pypi@arsensa.com',
    license='MIT',
    include_package_data=True,
    package_data={
        'improvr':[
            'templates/improvr/*.svg',
            'data/lid_box/*.json',
        ],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Framework :: Django',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
    ],
    keywords='django,planning,monte carlo tree search,demonstration learning',
    install_requires=[
        'Django>=3.2',
        'numpy>=1.17',
        'scipy>=1.4',
    ],
    entry_points={
        'console_scripts':[
            'improvr=improvr.cli:main',
        ],
    },
)

if __name__ == '__main__':
    from setuptools import setup, find_packages

    SETUP_ARGS['packages'] = find_packages()
    setup(**SETUP_ARGS)
