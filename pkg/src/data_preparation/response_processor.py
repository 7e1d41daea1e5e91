"""
Response data in the per-subject CSV schema:

    subject_id,branch,first_question,first_answer,second_question,second_answer

Answers are encoded +1/-1; a subject asked no second question (V with first
answer -1) has both second fields empty.
"""
import io
import logging
import re
from pathlib import Path
from typing import IO, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from src.models.probability import ObservableId, Outcome
from src.models.protocol import CSV_COLUMNS, ProtocolResult, ResponseRecord
from src.utils.exceptions import CondBellError, DuplicateSubject, IoFailure, MalformedRow, SchemaViolation

logger = logging.getLogger(__name__)


class ResponseProcessor:
    """Turns response rows into validated records and count tables, and back."""

    def read_frame(self, csv_stream: Union[str, Path, IO[str]]) -> pd.DataFrame:
        """
        Read the CSV as text columns, checking the header bit-exactly.

        Args:
            csv_stream: Path or open text stream

        Returns:
            DataFrame with the six schema columns, all strings
        """
        if isinstance(csv_stream, (str, Path)):
            csv_stream = io.StringIO(self._decode(Path(csv_stream)))
        try:
            frame = pd.read_csv(csv_stream, dtype=str, keep_default_na=False, skipinitialspace=False)
        except pd.errors.EmptyDataError:
            raise MalformedRow(1, "file is empty; header row required") from None
        except pd.errors.ParserError as e:
            match = re.search(r'line (\d+)', str(e))
            raise MalformedRow(int(match.group(1)) if match else None, f"unparseable row: {e}") from None

        if list(frame.columns) != CSV_COLUMNS:
            raise MalformedRow(1, f"header must be {','.join(CSV_COLUMNS)}")
        return frame

    @staticmethod
    def _decode(path: Path) -> str:
        """Strict UTF-8 text of a response file."""
        try:
            data = path.read_bytes()
        except OSError as e:
            raise IoFailure(f"cannot read {path}: {e.strerror or e}") from e
        try:
            return data.decode('utf-8')
        except UnicodeDecodeError as e:
            line = data.count(b'\n', 0, e.start) + 1
            raise MalformedRow(line, f"invalid UTF-8 byte 0x{data[e.start]:02x} at offset {e.start}") from None

    def parse_records(self, frame: pd.DataFrame) -> List[ResponseRecord]:
        """Validate every row; line numbers count the header as line 1."""
        records = []
        seen = set()
        for offset, row in enumerate(frame.itertuples(index=False, name=None)):
            line = offset + 2
            record = self._parse_row(line, row)
            if record.subject_id in seen:
                raise DuplicateSubject(f"line {line}: subject_id {record.subject_id!r} appears more than once")
            seen.add(record.subject_id)
            records.append(record)
        logger.debug(f"Validated {len(records)} response rows")
        return records

    def _parse_row(self, line: int, row: tuple) -> ResponseRecord:
        if any(isinstance(value, float) for value in row):
            raise MalformedRow(line, f"expected {len(CSV_COLUMNS)} fields")
        subject_id, branch, first_question, first_answer, second_question, second_answer = (
            value.strip() for value in row)
        if not subject_id:
            raise MalformedRow(line, "subject_id is empty")
        try:
            first = ObservableId.parse(first_question)
            first_value = Outcome.parse(first_answer)
            second = ObservableId.parse(second_question) if second_question else None
            second_value = Outcome.parse(second_answer) if second_answer else None
        except CondBellError as e:
            raise MalformedRow(line, str(e)) from None
        try:
            return ResponseRecord(subject_id=subject_id, branch=branch, first_question=first,
                                  first_answer=first_value, second_question=second,
                                  second_answer=second_value)
        except SchemaViolation as e:
            raise SchemaViolation(f"line {line}: {e}") from None

    def aggregate(self, records: Iterable[ResponseRecord], seed: Optional[int] = None) -> ProtocolResult:
        """Tally validated records into a ProtocolResult."""
        counts = dict.fromkeys(['n_U', 'n_V', 'U_b_plus', 'U_b_minus', 'V_c_plus', 'V_c_minus',
                                'a_plus_given_b_plus', 'c_plus_given_b_minus', 'a_plus_given_c_plus'], 0)
        for record in records:
            plus = record.first_answer is Outcome.PLUS
            second_plus = record.second_answer is Outcome.PLUS
            if record.branch == 'U':
                counts['n_U'] += 1
                if plus:
                    counts['U_b_plus'] += 1
                    counts['a_plus_given_b_plus'] += second_plus
                else:
                    counts['U_b_minus'] += 1
                    counts['c_plus_given_b_minus'] += second_plus
            else:
                counts['n_V'] += 1
                if plus:
                    counts['V_c_plus'] += 1
                    counts['a_plus_given_c_plus'] += second_plus
                else:
                    counts['V_c_minus'] += 1
        return ProtocolResult(n_total=counts['n_U'] + counts['n_V'], seed=seed, **counts)

    def parse_responses(self, csv_stream: Union[str, Path, IO[str]], seed: Optional[int] = None) -> ProtocolResult:
        """
        Ingest a response CSV.

        Args:
            csv_stream: Path or open text stream
            seed: Simulation seed to restore on the result (None for field data)

        Returns:
            ProtocolResult: Aggregated counts
        """
        records = self.parse_records(self.read_frame(csv_stream))
        result = self.aggregate(records, seed=seed)
        logger.info(f"Ingested {result.n_total} responses (U={result.n_U}, V={result.n_V})")
        return result

    def build_frame(self, branch_is_u: np.ndarray, first_answers: np.ndarray,
                    second_answers: np.ndarray) -> pd.DataFrame:
        """
        Per-subject rows from simulated answer arrays (subject index order).

        A second answer of 0 means the subject was asked no second question.
        """
        n = len(branch_is_u)
        encode = np.array(['-1', '', '+1'], dtype=object)
        first_q = np.where(branch_is_u, 'B', 'C')
        second_q = np.where(second_answers == 0, '',
                            np.where(branch_is_u & (first_answers == -1), 'C', 'A'))
        width = max(6, len(str(n)))
        return pd.DataFrame({
            'subject_id': [f"s{i:0{width}d}" for i in range(n)],
            'branch': np.where(branch_is_u, 'U', 'V'),
            'first_question': first_q,
            'first_answer': encode[first_answers + 1],
            'second_question': second_q,
            'second_answer': encode[second_answers + 1],
        }, columns=CSV_COLUMNS)

    def to_csv(self, frame: pd.DataFrame) -> str:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, lineterminator='\n')
        return buffer.getvalue()
