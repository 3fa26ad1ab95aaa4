import logging
import numpy as np
import pytest

from ChoiceModelTypes import ItemCatalog, ParamSchedule
from LabConfig import LabConfig


@pytest.fixture(autouse=True)
def default_config():
    """ Every test starts from the default configuration """
    LabConfig().reset_config()
    yield
    LabConfig().reset_config()


@pytest.fixture(autouse=True)
def quiet_lab_logger():
    yield
    names = ["LabLogger"] + [name for name in logging.root.manager.loggerDict if name.startswith("Replication ")]
    for name in names:
        logger = logging.getLogger(name)
        for handler in list(logger.handlers):
            logger.removeHandler(handler)
            handler.close()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def stationary(omega, horizon: int=10) -> ParamSchedule:
    return ParamSchedule(np.tile(np.asarray(omega, dtype=float), (horizon, 1)))


def two_phase(first, second, horizon: int, switch_at: int) -> ParamSchedule:
    values = np.tile(np.asarray(first, dtype=float), (horizon, 1))
    values[switch_at-1:] = second
    return ParamSchedule(values)


@pytest.fixture
def unit_catalog():
    return ItemCatalog.uniform(4, 2)
