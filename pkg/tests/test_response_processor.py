"""
Unit tests for the ResponseProcessor class
"""
import io
import sys
import tempfile
import unittest
from pathlib import Path

# Add project root to Python path
project_root = str(Path(__file__).resolve().parent.parent)
if project_root not in sys.path:
    sys.path.append(project_root)

from src.data_preparation.response_processor import ResponseProcessor  # noqa: E402
from src.models.agents import ClassicalAgent, QuantumAgent  # noqa: E402
from src.models.classical import random_symmetric_joint  # noqa: E402
from src.models.quantum import canonical_experiment  # noqa: E402
from src.services.protocol_service import ProtocolService  # noqa: E402
from src.utils.exceptions import DuplicateSubject, IoFailure, MalformedRow, SchemaViolation  # noqa: E402

HEADER = "subject_id,branch,first_question,first_answer,second_question,second_answer\n"


def stream(*rows, header=HEADER):
    return io.StringIO(header + ''.join(row + '\n' for row in rows))


class TestParseResponses(unittest.TestCase):
    """Test cases for CSV ingestion."""

    def setUp(self):
        """Set up test fixtures."""
        self.processor = ResponseProcessor()

    def test_four_subjects(self):
        result = self.processor.parse_responses(stream(
            "s1,U,B,+1,A,+1",
            "s2,U,B,-1,C,-1",
            "s3,V,C,+1,A,+1",
            "s4,V,C,-1,,",
        ))
        self.assertEqual((result.n_total, result.n_U, result.n_V), (4, 2, 2))
        self.assertEqual((result.U_b_plus, result.U_b_minus), (1, 1))
        self.assertEqual((result.V_c_plus, result.V_c_minus), (1, 1))
        self.assertEqual(result.a_plus_given_b_plus, 1)
        self.assertEqual(result.c_plus_given_b_minus, 0)
        self.assertEqual(result.a_plus_given_c_plus, 1)
        self.assertIsNone(result.seed)

    def test_reads_from_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'responses.csv'
            path.write_text(HEADER + "s1,U,B,+1,A,-1\ns2,V,C,-1,,\n", encoding='utf-8')
            result = self.processor.parse_responses(str(path), seed=5)
        self.assertEqual((result.n_U, result.n_V, result.seed), (1, 1, 5))

    def test_wrong_first_question(self):
        with self.assertRaises(SchemaViolation):
            self.processor.parse_responses(stream("s1,U,C,+1,A,+1"))

    def test_wrong_second_question(self):
        with self.assertRaises(SchemaViolation):
            self.processor.parse_responses(stream("s1,U,B,-1,A,+1"))

    def test_unasked_subject_with_second_answer(self):
        with self.assertRaises(SchemaViolation):
            self.processor.parse_responses(stream("s1,V,C,-1,A,+1"))

    def test_half_filled_second_fields(self):
        with self.assertRaises(SchemaViolation):
            self.processor.parse_responses(stream("s1,U,B,+1,A,"))

    def test_unknown_branch(self):
        with self.assertRaises(SchemaViolation):
            self.processor.parse_responses(stream("s1,W,B,+1,A,+1"))

    def test_bad_answer_encoding(self):
        with self.assertRaises(MalformedRow) as ctx:
            self.processor.parse_responses(stream("s1,U,B,+1,A,+1", "s2,U,B,yes,A,+1"))
        self.assertEqual(ctx.exception.line, 3)

    def test_too_few_fields(self):
        with self.assertRaises(MalformedRow):
            self.processor.parse_responses(stream("s1,U,B,+1"))

    def test_empty_subject_id(self):
        with self.assertRaises(MalformedRow):
            self.processor.parse_responses(stream(",U,B,+1,A,+1"))

    def test_only_documented_tokens(self):
        for row in ("s1,U,b,+1,A,+1", "s1,U,B,1,A,+1", "s1,U,B,+1,a,-1"):
            with self.assertRaises(MalformedRow) as ctx:
                self.processor.parse_responses(stream(row))
            self.assertEqual(ctx.exception.line, 2)

    def test_invalid_utf8_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'responses.csv'
            path.write_bytes(HEADER.encode('utf-8') + b"s1,V,C,-1,,\ns\xe92,V,C,-1,,\n")
            with self.assertRaises(MalformedRow) as ctx:
                self.processor.parse_responses(path)
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn(f"offset {len(HEADER) + 13}", ctx.exception.reason)

    def test_missing_file(self):
        with self.assertRaises(IoFailure):
            self.processor.parse_responses('/nonexistent/responses.csv')

    def test_unknown_line_is_omitted(self):
        error = MalformedRow(None, "unparseable row")
        self.assertIsNone(error.line)
        self.assertEqual(str(error), "unparseable row")

    def test_duplicate_subject(self):
        with self.assertRaises(DuplicateSubject):
            self.processor.parse_responses(stream("s1,U,B,+1,A,+1", "s1,V,C,-1,,"))

    def test_bad_header(self):
        with self.assertRaises(MalformedRow) as ctx:
            self.processor.parse_responses(stream("s1,U,B,+1,A,+1", header="id,branch,q1,a1,q2,a2\n"))
        self.assertEqual(ctx.exception.line, 1)

    def test_empty_file(self):
        with self.assertRaises(MalformedRow):
            self.processor.parse_responses(io.StringIO(''))

    def test_header_only(self):
        result = self.processor.parse_responses(stream())
        self.assertEqual(result.n_total, 0)
        self.assertEqual(len(result.empty_branches()), 3)


class TestCsvExport(unittest.TestCase):
    """Test cases for writing simulated responses."""

    def setUp(self):
        """Set up test fixtures."""
        self.processor = ResponseProcessor()
        self.service = ProtocolService()

    def test_export_matches_counts(self):
        for agent in (QuantumAgent(experiment=canonical_experiment()),
                      ClassicalAgent(pmf=random_symmetric_joint(8))):
            for seed in (1, 2, 3):
                frame = self.service.simulate_responses(agent, 500, seed)
                parsed = self.processor.parse_responses(io.StringIO(self.processor.to_csv(frame)), seed=seed)
                self.assertEqual(parsed, self.service.run_protocol(agent, 500, seed))

    def test_export_layout(self):
        frame = self.service.simulate_responses(QuantumAgent(experiment=canonical_experiment()), 10, 4)
        text = self.processor.to_csv(frame)
        self.assertTrue(text.startswith(HEADER))
        self.assertTrue(text.endswith('\n'))
        self.assertEqual(len(text.splitlines()), 11)
        self.assertEqual(frame['subject_id'].iloc[0], 's000000')
        self.assertTrue(set(frame['first_answer']) <= {'+1', '-1'})


if __name__ == '__main__':
    unittest.main()
