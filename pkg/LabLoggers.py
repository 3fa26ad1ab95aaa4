"""
Implement the loggers used throughout the lab
"""

import logging
import os
from pythonjsonlogger import jsonlogger
import sys
from typing import Optional


sys_excepthook = sys.excepthook

LAB_LOGGER_NAME = "LabLogger"

def setup_logger(logger: logging.Logger, fname: str):
    """ Standardizes logger output style """
    if fname is None:
        raise ValueError("Log file can't be None")
    logHandler = logging.FileHandler(fname)
    jsonFmt = jsonlogger.JsonFormatter(
        "%(name)s %(asctime)s %(levelname)s %(filename)s %(lineno)s %(process)d %(message)s",
        rename_fields={"levelname": "severity", "asctime": "timestamp"},
        datefmt="%Y-%m-%dT%H:%M:%SZ",
    )
    logHandler.setFormatter(jsonFmt)
    logger.addHandler(logHandler)
    logger.setLevel(logging.DEBUG)

def handle_exception(exc_type, exc_value, exc_traceback):
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return

    LabLogger().critical("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))

    # Call original
    sys_excepthook(exc_type, exc_value, exc_traceback)

def setup_lab_logger(fname: str):
    """ Setup the logger for experiment level events """
    logger = LabLogger()
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    setup_logger(logger, fname)

    sys.excepthook = handle_exception

def LabLogger(logger_id: Optional[str]=None) -> logging.Logger:
    return logging.getLogger(logger_id if logger_id is not None else LAB_LOGGER_NAME)


def setup_replication_logger(replication_id: int, output_dir: str, split_out: bool) -> str:
    """ Setup the logger for a single replication

    Let the config file switch between using the experiment wide logger and a per-replication logger.
    """
    logger_id = LAB_LOGGER_NAME
    if split_out:
        logger_id = "Replication " + str(replication_id)
        logger = logging.getLogger(logger_id)
        if not logger.handlers:
            setup_logger(logger, os.path.join(output_dir, logger_id + ".log"))
    return logger_id
