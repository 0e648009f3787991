"""Shared fixtures: the default virtual experiment, built once per session."""

import pytest

from pairspec import config as config_mod
from pairspec import spectrometer


@pytest.fixture(scope="session")
def default_config():
    return config_mod.parse_config({})


@pytest.fixture(scope="session")
def apparatus(default_config):
    return config_mod.build_apparatus(default_config)


@pytest.fixture(scope="session")
def default_scan(default_config):
    return config_mod.scan_settings(default_config)


@pytest.fixture(scope="session")
def passband_nm(default_config):
    return spectrometer.resolution(default_config.spectrometer)
