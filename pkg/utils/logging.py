import logging
from pathlib import Path
from typing import Optional, Union

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: Union[str, int] = "INFO", log_file: Optional[Path] = None) -> logging.Logger:
    """Set up console logging, plus a file log when requested.

    Args:
        level: Root logging level name or number
        log_file: Optional file that receives the same records

    Returns:
        The configured root logger
    """
    handlers = [logging.StreamHandler()]
    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)

    # Configure root logger
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)

    # Pillow logs every decoded image at DEBUG
    logging.getLogger('PIL').setLevel(logging.WARNING)

    return logging.getLogger()
