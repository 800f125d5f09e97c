import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, model_validator

from hardy_bellman.Exponents import Exponents

DEFAULT_SEED = 20240101
LOG_LEVEL_ENV = "HARDY_BELLMAN_LOG_LEVEL"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class RunConfig(BaseModel):
    """
    Every input of one CLI invocation. Embedded verbatim in the JSON documents it produces.
    """

    model_config = ConfigDict(frozen=True)

    command: str
    p: Optional[float] = None
    q: Optional[float] = None
    s1: Optional[float] = None
    s2: Optional[float] = None
    f: Optional[float] = None
    A: Optional[float] = None
    F: Optional[float] = None
    kappa: float = 1.0
    tol: float = 1e-12
    resolution: int = 100
    mode: Optional[str] = None
    n: int = 2000
    trials: int = 8
    seed: int = DEFAULT_SEED
    grid: str = "geometric"
    samples: int = 1000
    presets: List[str] = []
    workers: Optional[int] = None
    out: Optional[str] = None
    format: str = "json"

    @model_validator(mode="after")
    def _check_exponents(self) -> "RunConfig":
        if self.p is not None and self.q is not None:
            self.exponents()
        elif self.p is not None and not self.p > 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {self.format!r}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        return self

    def exponents(self) -> Exponents:
        if self.p is None or self.q is None:
            raise ValueError(f"command {self.command!r} needs both --p and --q")
        return Exponents(p=self.p, q=self.q)


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Configure the package logger once, on stderr.

    The level comes from the argument, else from HARDY_BELLMAN_LOG_LEVEL (a .env file is honoured),
    else WARNING.
    """
    load_dotenv()
    name = (level or os.getenv(LOG_LEVEL_ENV, "WARNING")).upper()
    if name not in ("DEBUG", "INFO", "WARNING", "ERROR"):
        name = "WARNING"
    logger = logging.getLogger("hardy_bellman")
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    logger.setLevel(logging.getLevelName(name))
    return logger
