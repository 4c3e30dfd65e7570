import json
import logging
import sys
from datetime import datetime
from typing import Any, Dict, Optional


# Configure root logger
def setup_logging(log_level: str = "INFO"):
    """
    Setup application logging with the specified log level.

    Args:
        log_level (str): Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    log_format = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

    numeric_level = getattr(logging, log_level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValueError(f"Invalid log level: {log_level}")

    logging.basicConfig(
        level=numeric_level,
        format=log_format,
        handlers=[logging.StreamHandler(sys.stderr)]
    )

    # numpy / sympy internals are chatty at DEBUG
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("sympy").setLevel(logging.WARNING)

    logger = logging.getLogger()
    logger.setLevel(numeric_level)

    return logger


def log_residual(logger: logging.Logger, entry: Dict[str, Any]):
    """
    Log one checked identity as a JSON line.

    Args:
        logger (logging.Logger): Logger instance
        entry (Dict[str, Any]): Residual entry (name, value, tolerance, passed, anchor)
    """
    level = logging.INFO if entry.get("passed", True) else logging.WARNING
    logger.log(level, f"Residual: {json.dumps(entry, default=str, sort_keys=True)}")


def log_error(logger: logging.Logger, error: Exception, context: Optional[Dict[str, Any]] = None):
    """
    Log an error with its context.

    Args:
        logger (logging.Logger): Logger instance
        error (Exception): The exception to log
        context (Dict[str, Any], optional): Additional context information
    """
    error_info = {
        "error_type": type(error).__name__,
        "error_message": str(error),
        "timestamp": datetime.now().isoformat()
    }

    for attr in ("mismatch", "residual", "index", "composition_norm"):
        if hasattr(error, attr):
            error_info[attr] = getattr(error, attr)

    if context:
        error_info["context"] = context

    logger.error(f"Error: {json.dumps(error_info, default=str)}")
