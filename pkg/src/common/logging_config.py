"""
Logging setup for beamgan.

Console logging follows the plain '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
layout, or python-json-logger records when BEAMGAN_LOG_FORMAT=json. Training and
federated runs also write line-delimited JSON metric logs through
`open_metrics_logger`.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pythonjsonlogger import jsonlogger

TEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """
    Configure the root logger once per process.

    Args:
        level: Logging level name; defaults to BEAMGAN_LOG_LEVEL (or LOG_LEVEL)
        fmt: "text" or "json"; defaults to BEAMGAN_LOG_FORMAT
    """
    from .settings import get_settings

    settings = get_settings()
    level = (level or settings.log_level).upper()
    fmt = fmt or settings.log_format

    handler = logging.StreamHandler()
    if fmt == "json":
        handler.setFormatter(jsonlogger.JsonFormatter('%(asctime)s %(name)s %(levelname)s %(message)s'))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(level)


class MetricsLogger:
    """
    Line-delimited JSON writer for per-iteration / per-round metric records.

    Each call to `record` emits exactly one JSON object per line. Records are
    routed through a private logger with a python-json-logger formatter so the
    file never mixes with console output.

    Examples:
        >>> import tempfile, json
        >>> path = Path(tempfile.mkdtemp()) / "train.jsonl"
        >>> log = MetricsLogger(path)
        >>> log.record(iter=1, loss_d=0.5)
        >>> log.close()
        >>> json.loads(path.read_text().splitlines()[0])["iter"]
        1
    """

    def __init__(self, path: Path, name: str = "metrics"):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._logger = logging.getLogger(f"beamgan.{name}.{id(self)}")
        self._logger.propagate = False
        self._logger.setLevel(logging.INFO)
        self._handler = logging.FileHandler(self.path, mode="w")
        # Empty format: only the fields passed via `extra` are serialized
        self._handler.setFormatter(jsonlogger.JsonFormatter("", timestamp=False))
        self._logger.addHandler(self._handler)

    def record(self, **fields: Any) -> None:
        """Write one metrics record."""
        self._logger.info("", extra=_jsonable(fields))

    def close(self) -> None:
        self._logger.removeHandler(self._handler)
        self._handler.close()

    def __enter__(self) -> "MetricsLogger":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


def _jsonable(fields: Dict[str, Any]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, value in fields.items():
        if hasattr(value, "item") and not isinstance(value, (list, dict)):
            value = value.item()
        out[key] = value
    return out


def open_metrics_logger(out_dir: Optional[Path], filename: str) -> Optional[MetricsLogger]:
    """Return a MetricsLogger under out_dir, or None when no output directory is set."""
    if out_dir is None:
        return None
    return MetricsLogger(Path(out_dir) / filename, name=Path(filename).stem)
