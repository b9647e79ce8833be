from spectriple.logger import logger

__version__ = "0.1.0"
logger.info("spectriple initialised")
