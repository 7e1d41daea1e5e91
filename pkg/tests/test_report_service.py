"""
Unit tests for the ReportService class
"""
import json
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

# Add project root to Python path
project_root = str(Path(__file__).resolve().parent.parent)
if project_root not in sys.path:
    sys.path.append(project_root)

from src.config.config import get_config  # noqa: E402
from src.models.inference import TestConfig  # noqa: E402
from src.models.protocol import FrequencyTriple  # noqa: E402
from src.services.inference_service import InferenceService  # noqa: E402
from src.services.report_service import ReportService, manifest_timestamp  # noqa: E402
from src.utils.exceptions import InvalidConfig, IoFailure, SchemaViolation  # noqa: E402
from src.utils.file_manager import FileManager  # noqa: E402


class TestReportService(unittest.TestCase):
    """Test cases for ReportService class."""

    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.TemporaryDirectory()
        self.file_manager = FileManager(self.tmp.name)
        self.service = ReportService(self.file_manager)
        self.report = InferenceService(self.file_manager).test_quantum_like(
            FrequencyTriple.from_counts((250, 250, 750), (1000, 1000, 1000)), TestConfig())

    def tearDown(self):
        """Clean up test fixtures."""
        self.tmp.cleanup()

    def test_json_round_trip(self):
        manifest = self.service.build_manifest('analyze', {'alpha': 0.05}, seed=42)
        document = self.service.write_report(self.report, manifest, 'json')
        report, loaded = self.service.read_report(document)
        self.assertEqual(report, self.report)
        self.assertEqual(loaded, manifest)
        self.assertEqual(loaded.tool_version, 'condbell 1.0.0')

    def test_manifest_carries_config_snapshot(self):
        manifest = self.service.build_manifest('analyze')
        self.assertEqual(manifest.config, get_config().snapshot())
        self.assertEqual(manifest.config['alpha'], 0.05)
        self.assertEqual(manifest.config['grid_step'], 1.0)

    @patch.dict(os.environ, {'SOURCE_DATE_EPOCH': '1700000000'})
    def test_pinned_timestamp_gives_identical_bytes(self):
        documents = []
        for _ in range(2):
            manifest = self.service.build_manifest('analyze', {'alpha': 0.05}, seed=1)
            documents.append(self.service.write_report(self.report, manifest, 'json'))
        self.assertEqual(documents[0], documents[1])
        self.assertEqual(json.loads(documents[0])['manifest']['timestamps']['created'],
                         '2023-11-14T22:13:20+00:00')

    @patch.dict(os.environ, {'SOURCE_DATE_EPOCH': 'yesterday'})
    def test_bad_epoch(self):
        with self.assertRaises(InvalidConfig):
            manifest_timestamp()

    def test_text_report(self):
        manifest = self.service.build_manifest('analyze', seed=None)
        text = self.service.write_report(self.report, manifest, 'text')
        lines = text.splitlines()
        self.assertEqual(lines[0], 'condbell analyze')
        self.assertIn('verdict: QUANTUM_LIKE', lines)
        self.assertIn('nu(a+|b+) = 250/1000 = 0.250000', lines)
        self.assertIn('nu(a+|c+) = 750/1000 = 0.750000', lines)
        self.assertIn('homogeneity: not checked', lines)
        self.assertTrue(lines[-1].startswith('manifest: condbell 1.0.0, seed none'))

    def test_input_digests(self):
        path = self.file_manager.save_text('abc', 'model.json', category='results')
        manifest = self.service.build_manifest('exact', inputs=[path])
        self.assertEqual(manifest.input_digests[str(path)],
                         'sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad')

    def test_unknown_format(self):
        manifest = self.service.build_manifest('analyze')
        with self.assertRaises(InvalidConfig):
            self.service.write_report(self.report, manifest, 'yaml')

    def test_read_invalid_documents(self):
        with self.assertRaises(IoFailure):
            self.service.read_report('{not json')
        with self.assertRaises(SchemaViolation):
            self.service.read_report('{"report": {}}')

    def test_save_goes_to_reports_directory(self):
        path = self.service.save('hello\n', 'out.txt')
        self.assertEqual(path, Path(self.tmp.name) / 'reports' / 'out.txt')
        self.assertEqual(path.read_text(encoding='utf-8'), 'hello\n')
        self.service.save('again\n', 'out.txt')
        self.assertTrue(any((path.parent / 'backups').iterdir()))


if __name__ == '__main__':
    unittest.main()
