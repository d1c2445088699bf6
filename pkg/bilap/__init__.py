# Set default logging handler to avoid "No handler found" warnings.
import logging
from logging import NullHandler

__version__ = "1.0.0"

logging.getLogger(__name__).addHandler(NullHandler())
