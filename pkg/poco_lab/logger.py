# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import logging
import sys

ROOT_LOGGER = "poco_lab"

_FORMAT = "[poco_lab] %(asctime)s %(levelname)s %(name)s: %(message)s"


def get_logger(name=None):
	"""Return a logger under the poco_lab namespace"""
	if not name or name == ROOT_LOGGER:
		return logging.getLogger(ROOT_LOGGER)
	if not name.startswith(ROOT_LOGGER + "."):
		name = f"{ROOT_LOGGER}.{name}"
	return logging.getLogger(name)


def log_error(message, title=None):
	"""Record a caught error, optionally under a title"""
	logger = get_logger()
	if title:
		logger.error("%s: %s", title, message)
	else:
		logger.error("%s", message)


def configure_logging(level="WARNING", verbose=False):
	"""Attach a single stderr handler to the poco_lab logger"""
	logger = get_logger()
	for handler in list(logger.handlers):
		logger.removeHandler(handler)

	handler = logging.StreamHandler(sys.stderr)
	handler.setFormatter(logging.Formatter(fmt=_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
	logger.addHandler(handler)
	logger.setLevel(logging.DEBUG if verbose else getattr(logging, str(level).upper(), logging.WARNING))
	logger.propagate = False
	return logger
