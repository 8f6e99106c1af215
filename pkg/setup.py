# -*- coding: utf-8 -*-
from setuptools import setup, find_packages

with open("requirements.txt") as f:
	install_requires = f.read().strip().split("\n")

version = "1.0.0"

setup(
	name="poco_lab",
	version=version,
	description="Guard-toggling iterative seed selection over GuardLang fuzz targets",
	author="PoCo Lab contributors",
	packages=find_packages(exclude=["examples", "examples.*"]),
	zip_safe=False,
	include_package_data=True,
	package_data={
		"poco_lab.targets": ["*.gl"],
		"poco_lab.tests": ["golden/*"],
	},
	install_requires=install_requires,
	extras_require={
		"tests": ["hypothesis", "pytest"],
	},
	entry_points={
		"console_scripts": [
			"poco-lab=poco_lab.api.cli:main",
		],
	},
	python_requires=">=3.10",
	classifiers=[
		"Development Status :: 4 - Beta",
		"Environment :: Console",
		"Intended Audience :: Science/Research",
		"License :: OSI Approved :: MIT License",
		"Operating System :: OS Independent",
		"Programming Language :: Python :: 3",
		"Programming Language :: Python :: 3.10",
		"Programming Language :: Python :: 3.11",
		"Programming Language :: Python :: 3.12",
		"Topic :: Software Development :: Testing",
	],
)
