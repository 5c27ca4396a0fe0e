import io
import re
from pathlib import Path
from typing import List

import pandas as pd
from loguru import logger

from synth_control.errors import EmptyInput, ParseError
from synth_control.ingest.base import ObservationReader, Source
from synth_control.ingest.observation import LongObservation
from synth_control.panel.dataset import LONG_COLUMNS

# data rows start on line 2, after the header
FIRST_DATA_LINE = 2
_PANDAS_LINE = re.compile(r"line (\d+)")


class LongCsvReader(ObservationReader):
    """Reads UTF-8 ``unit,date,variable,value`` CSV files (RFC 4180 quoting)."""

    def read(self, source: Source) -> List[LongObservation]:
        """
        Parse every data row into a :class:`LongObservation`, keeping row order.
        :param source: path, raw bytes or a binary stream
        :return: list of observations
        """
        raw, name = self._read_bytes(source)
        if not raw.strip():
            raise EmptyInput(name)

        try:
            frame = pd.read_csv(
                io.BytesIO(raw),
                dtype=str,
                keep_default_na=False,
                encoding="utf-8",
                skip_blank_lines=True,
            )
        except pd.errors.ParserError as e:
            match = _PANDAS_LINE.search(str(e))
            line = int(match.group(1)) if match else 0
            raise ParseError(line, None, str(e).strip()) from e
        except UnicodeDecodeError as e:
            raise ParseError(0, None, f"input is not UTF-8: {e.reason}") from e

        header = [str(c).strip() for c in frame.columns]
        if header != LONG_COLUMNS:
            raise ParseError(1, None, f"expected header {','.join(LONG_COLUMNS)}")
        if frame.empty:
            raise EmptyInput(name)

        for column in ("unit", "variable"):
            blank = frame[column].str.strip() == ""
            if blank.any():
                raise ParseError(self._line(blank), column, "empty identifier")

        dates = pd.to_datetime(frame["date"].str.strip(), format="%Y-%m-%d", errors="coerce")
        if dates.isna().any():
            bad = dates.isna()
            raise ParseError(
                self._line(bad), "date", f"'{frame['date'][bad].iloc[0]}' is not an ISO date"
            )

        values = pd.to_numeric(frame["value"].str.strip(), errors="coerce")
        if values.isna().any():
            bad = values.isna()
            raise ParseError(
                self._line(bad), "value", f"'{frame['value'][bad].iloc[0]}' is not a number"
            )

        observations = [
            LongObservation(unit=u.strip(), date=d, variable=v.strip(), value=float(x))
            for u, d, v, x in zip(
                frame["unit"], dates.dt.date, frame["variable"], values
            )
        ]
        logger.info(f"Read {len(observations)} observations from {name}")
        return observations

    @staticmethod
    def _line(mask: pd.Series) -> int:
        return int(mask.to_numpy().nonzero()[0][0]) + FIRST_DATA_LINE

    @staticmethod
    def _read_bytes(source: Source):
        if isinstance(source, bytes):
            return source, "input bytes"
        if isinstance(source, (str, Path)):
            return Path(source).read_bytes(), str(source)
        return source.read(), getattr(source, "name", "input stream")


def load_long_csv(source: Source) -> List[LongObservation]:
    return LongCsvReader().read(source)


def observations_to_frame(observations: List[LongObservation]) -> pd.DataFrame:
    return pd.DataFrame(
        [o.to_dict() for o in observations],
        columns=LONG_COLUMNS,
    )


__all__ = ["LongCsvReader", "load_long_csv", "observations_to_frame"]
