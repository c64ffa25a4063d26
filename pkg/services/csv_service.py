"""
CSV Service.

Reads one-column return series (optional header ``y``) and writes result
tables as CSV or JSON with a fixed float format, so repeated runs produce
byte-identical files.
"""
import csv
import json
import math
from io import StringIO
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

from models.errors import InputError
from utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


class CSVService:
    """
    Series input and table output.
    """

    HEADER = 'y'
    FLOAT_FORMAT = '%.10g'
    FORMATS = ('csv', 'json')

    @classmethod
    def parse_series(cls, csv_content: str) -> np.ndarray:
        """
        Parse CSV content into a float series.

        Args:
            csv_content: Raw file content, one value per line, header 'y' optional

        Returns:
            1-D float array

        Raises:
            InputError: naming the 1-based line of the first malformed row
        """
        try:
            # One raw string per physical line; splitting is done here
            df = pd.read_csv(
                StringIO(csv_content), header=None, names=['raw'], sep='\x01', dtype=str,
                skip_blank_lines=False, quoting=csv.QUOTE_NONE, keep_default_na=False,
            )
        except pd.errors.EmptyDataError:
            raise InputError("Input CSV is empty")
        except pd.errors.ParserError as e:
            raise InputError(f"CSV parsing error: {e}")

        lines = df['raw'].fillna('').str.strip()
        # Trailing blank lines are not rows
        while len(lines) and lines.iloc[-1] == '':
            lines = lines.iloc[:-1]
        first_data_row = 0
        if len(lines) and lines.iloc[0].strip('"').lower() == cls.HEADER:
            first_data_row = 1

        values = []
        for idx in range(first_data_row, len(lines)):
            line_num = idx + 1
            row_error = cls.validate_row(lines.iloc[idx], line_num)
            if row_error:
                raise InputError(row_error, line=line_num)
            values.append(float(lines.iloc[idx]))

        if not values:
            raise InputError("No observations found in CSV file")
        return np.asarray(values, dtype=float)

    @classmethod
    def validate_row(cls, cell: str, line_num: int):
        """
        Validate one line of the series.

        Returns:
            Error message if validation fails, None if valid
        """
        if cell == '':
            return f"Line {line_num}: empty row"
        if ',' in cell:
            return f"Line {line_num}: expected a single column, got '{cell}'"
        try:
            value = float(cell)
        except ValueError:
            return f"Line {line_num}: '{cell}' is not a number"
        if not math.isfinite(value):
            return f"Line {line_num}: non-finite value '{cell}'"
        return None

    @classmethod
    def read_series(cls, path: PathLike) -> np.ndarray:
        path = Path(path)
        try:
            content = path.read_text(encoding='utf-8')
        except OSError as e:
            raise InputError(f"Cannot read {path}: {e}")
        series = cls.parse_series(content)
        logger.info(f"Read {series.size} observations from {path}")
        return series

    @classmethod
    def series_frame(cls, y: np.ndarray) -> pd.DataFrame:
        return pd.DataFrame({cls.HEADER: np.asarray(y, dtype=float)})

    @classmethod
    def write_table(cls, frame: pd.DataFrame, path: PathLike, fmt: str = 'csv') -> Path:
        """
        Write a result table; ``path`` gets the extension of ``fmt``.

        Returns:
            Path written
        """
        if fmt not in cls.FORMATS:
            raise InputError(f"Unknown output format '{fmt}' (expected one of {cls.FORMATS})")
        path = Path(path).with_suffix(f'.{fmt}')
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == 'csv':
            frame.to_csv(path, index=False, float_format=cls.FLOAT_FORMAT, lineterminator='\n')
        else:
            cls.write_json({'columns': list(frame.columns), 'rows': cls._records(frame)}, path)
        logger.debug(f"Wrote {len(frame)} rows to {path}")
        return path

    @classmethod
    def write_json(cls, payload: Dict[str, Any], path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(cls.dumps(payload) + '\n', encoding='utf-8')
        return path

    @classmethod
    def dumps(cls, payload: Any) -> str:
        return json.dumps(cls._plain(payload), sort_keys=True, indent=2)

    @classmethod
    def _records(cls, frame: pd.DataFrame):
        return [{col: cls._plain(val) for col, val in row.items()} for row in frame.to_dict(orient='records')]

    @classmethod
    def _plain(cls, value: Any) -> Any:
        """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
        if isinstance(value, dict):
            return {str(k): cls._plain(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [cls._plain(v) for v in value]
        if isinstance(value, np.ndarray):
            return [cls._plain(v) for v in value.tolist()]
        if isinstance(value, (np.bool_, bool)):
            return bool(value)
        if isinstance(value, (np.integer,)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            value = float(value)
            if not math.isfinite(value):
                return None
            return float(cls.FLOAT_FORMAT % value)
        return value
