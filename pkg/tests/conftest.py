import os

import pytest

from medianqmc.space import CACHE_DIR_ENV


@pytest.fixture(scope="session", autouse=True)
def theta_cache_dir(tmp_path_factory):
    """Point the theta-table disk cache at a session tmp dir.

    Tables are shared across tests in one session but never touch $HOME.
    """
    path = tmp_path_factory.mktemp("theta-cache")
    old = os.environ.get(CACHE_DIR_ENV)
    os.environ[CACHE_DIR_ENV] = str(path)
    yield path
    if old is None:
        os.environ.pop(CACHE_DIR_ENV, None)
    else:
        os.environ[CACHE_DIR_ENV] = old
