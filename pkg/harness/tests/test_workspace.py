import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from harness.workspace import Workspace, artifact_id


class ArtifactIdTests(SimpleTestCase):
    def test_matches_git_blob_ids(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "hello.txt"
            path.write_bytes(b"hello\n")
            self.assertEqual(artifact_id(path), "ce013625030ba8dba906f756967f9e9ca394464a")
            path.write_bytes(b"")
            self.assertEqual(artifact_id(path), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391")


class WorkspaceTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.ws = Workspace(self.tmp.name)
        self.artifact = self.ws.checkpoint("gan")
        self.artifact.parent.mkdir(parents=True)
        self.artifact.write_bytes(b"weights")
        self.ws.write_marker("train_gan", "abc", {"checkpoints/gan.ckpt": artifact_id(self.artifact)}, {"l1": 0.1})

    def test_layout(self):
        root = Path(self.tmp.name)
        self.assertEqual(self.ws.manifest, root / "data" / "manifest.jsonl")
        self.assertEqual(self.ws.raw_manifest, root / "raw" / "manifest.jsonl")
        self.assertEqual(self.ws.checkpoint("crossmodal"), root / "checkpoints" / "crossmodal.ckpt")
        self.assertEqual(self.ws.marker("evaluate"), root / "stages" / "evaluate.json")

    def test_completed_marker(self):
        marker = self.ws.completed("train_gan", "abc")
        self.assertEqual(marker["metrics"], {"l1": 0.1})
        self.assertIsNotNone(self.ws.completed("train_gan"))

    def test_other_config_hash(self):
        self.assertIsNone(self.ws.completed("train_gan", "def"))

    def test_changed_artifact(self):
        self.artifact.write_bytes(b"other weights")
        self.assertIsNone(self.ws.completed("train_gan", "abc"))

    def test_deleted_artifact(self):
        self.artifact.unlink()
        self.assertIsNone(self.ws.completed("train_gan"))

    def test_missing_marker(self):
        self.assertIsNone(self.ws.completed("synth"))
