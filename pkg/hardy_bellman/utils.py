import logging
import math
import os
import tempfile
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Sequence, Tuple

import numpy as np

CSV_FLOAT_FORMAT = "{:.17g}"


def populate_template(template, data):
    if isinstance(template, dict):
        result = {}
        for key, value in template.items():
            if isinstance(value, str) and value.startswith("{") and value.endswith("}"):
                key_in_data = value[1:-1]
                result[key] = data.get(key_in_data, value)
            else:
                result[key] = populate_template(value, data)
        return result
    elif isinstance(template, list):
        return [populate_template(item, data) for item in template]
    else:
        return template


def document_template() -> Dict[str, Any]:
    """
    The envelope every JSON document of the CLI is built from.

    Returns:
        Dict[str, Any]: Template with "{...}" placeholders for populate_template.
    """
    return {
        "tool": "hardy-bellman",
        "version": "{version}",
        "command": "{command}",
        "config": "{config}",
        "result": "{result}",
    }


def to_jsonable(value: Any) -> Any:
    """
    Convert numpy scalars/arrays, enums and nested containers into plain JSON types.

    Non-finite floats become the strings "inf", "-inf" and "nan" so documents stay valid JSON.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def format_float(value: Any) -> str:
    """Format a number for CSV output: 17 significant digits, empty string for None."""
    if value is None:
        return ""
    return CSV_FLOAT_FORMAT.format(float(value))


def csv_lines(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    Render a header and rows as CSV text with LF line endings.

    Floats are written with 17 significant digits, everything else with str().
    """
    lines: List[str] = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if cell is None:
                cells.append("")
            elif isinstance(cell, (float, np.floating)):
                cells.append(format_float(cell))
            elif isinstance(cell, Enum):
                cells.append(str(cell.value))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    """
    Write text to path through a temporary file in the same directory and an atomic rename.

    Args:
        path (str): Destination file.
        text (str): Content, written with LF line endings.
    """
    atomic_write_files({path: text})


def atomic_write_files(contents: Dict[str, str]) -> None:
    """
    Write several files as one set: every file is staged to a temporary sibling first and only
    once all of them are on disk are they renamed into place. A failure while staging removes
    the staged files and leaves every destination untouched.

    Args:
        contents (Dict[str, str]): Destination path to content, written with LF line endings.
    """
    staged: List[Tuple[str, str]] = []
    try:
        for path, text in contents.items():
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
            staged.append((tmp_path, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
        for tmp_path, path in staged:
            os.replace(tmp_path, path)
    except BaseException:
        for tmp_path, _ in staged:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
        raise


def central_difference(func: Callable[[float], float], x: float, step: float) -> float:
    """Symmetric difference quotient (func(x + step) - func(x - step)) / (2 step)."""
    return (func(x + step) - func(x - step)) / (2.0 * step)


def write_log(log, logger, message, level="INFO"):
    if log:
        logger.log(logging.getLevelName(level), message)
