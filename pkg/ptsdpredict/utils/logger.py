import logging
import os
import sys
from datetime import datetime
from logging import FileHandler, StreamHandler

import coloredlogs
from pythonjsonlogger import jsonlogger

ROOT_LOGGER_NAME = "ptsdpredict"
CONSOLE_FORMAT = "%(asctime)s [%(levelname)8s] [%(name)s] %(message)s"
FILE_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


class Logger:
    """
    Logging setup for console and file outputs of one experiment process.

    Every module of the package logs through ``logging.getLogger(__name__)``;
    this class attaches the handlers to the package root logger so those
    records reach the console (coloured) and a JSON-lines log file.

    Attributes:
        name (str): The mode specifier, used in the log folder and file name.
        logfile (str): The path to the JSON log file.
        fileHandler (logging.Handler): JSON-lines file handler, always DEBUG.
        streamHandler (logging.Handler): Console handler, level set by verbose.
        logger (logging.Logger): The package root logger.

    Args:
        mode (str): Name of the run mode, e.g. 'Experiment', 'Compare'.
        log_folder (str): Folder where log files are stored. Default is 'logs'.
        verbose (int): Verbosity level for the console:
            0 - ERROR, 1 - WARNING, 2 - INFO, 3 - DEBUG.
            The file always receives DEBUG records.

    Example:
        logger = Logger(mode='Experiment', verbose=2)
        logger.logger.info("This is an info message")
    """

    console_level = None
    data_logger_level = None
    name = None

    def __init__(
        self,
        mode="Experiment",
        log_folder: str = "logs",
        verbose=2,
        log_to_file=True,
    ):
        self.name = mode
        self.setup_level(verbose)

        self.logger = logging.getLogger(ROOT_LOGGER_NAME)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False
        self.remove_handlers()

        if log_to_file:
            self.setup_folder_file(log_folder)
            self.file_handler()
        self.stream_handler()

    def remove_handlers(self):
        # A second Logger in the same process replaces the first one's handlers
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()

    def file_handler(self):
        self.fileHandler = FileHandler(self.logfile, encoding="utf-8")
        self.fileHandler.setLevel(self.data_logger_level)
        self.fileHandler.setFormatter(jsonlogger.JsonFormatter(FILE_FORMAT))
        self.logger.addHandler(self.fileHandler)

    def stream_handler(self):
        self.streamHandler = StreamHandler(sys.stderr)
        self.streamHandler.setLevel(self.console_level)
        self.streamHandler.setFormatter(
            coloredlogs.ColoredFormatter(fmt=CONSOLE_FORMAT)
        )
        self.logger.addHandler(self.streamHandler)

    def setup_level(self, verbose):
        # Determine logging levels based on verbose parameter
        if verbose >= 3:
            self.console_level = logging.DEBUG
        elif verbose == 2:
            self.console_level = logging.INFO
        elif verbose == 1:
            self.console_level = logging.WARNING
        else:  # verbose == 0
            self.console_level = logging.ERROR
        # File logging remains at DEBUG
        self.data_logger_level = logging.DEBUG

    def setup_folder_file(self, log_folder):
        # Ensure subfolder for mode exists within the main log_folder
        mode_log_folder = os.path.join(log_folder, self.name)
        os.makedirs(mode_log_folder, exist_ok=True)

        timestamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        filename = f"{self.name}_{timestamp}.log"
        self.logfile = os.path.join(mode_log_folder, filename)
