# Copyright 2026 The tinv Authors
# SPDX-License-Identifier: Apache-2.0

import hashlib
import json
import os
import struct
import subprocess

import pytest

import tinv


def reference_digest(dtype, shape, data):
    h = hashlib.sha256()
    h.update(b"tinv-digest-v1\0" + dtype.encode() + b"\0")
    h.update(struct.pack("<q", len(shape)))
    for d in shape:
        h.update(struct.pack("<q", d))
    h.update(data)
    return h.hexdigest()[: tinv.DIGEST_HEX_LENGTH]


def merged_stream(run_dir):
    """One record stream with a single header, as a live tracer would emit."""
    lines = []
    for path in sorted(run_dir.glob("*.ndjson")):
        for line in path.read_text().splitlines():
            if json.loads(line).get("kind") == "header":
                continue
            lines.append(line)
    header = json.dumps({"kind": "header", "schema": tinv.SCHEMA_VERSION})
    return "\n".join([header] + lines) + "\n"


def test_digest_matches_reference():
    data = struct.pack("<4f", 1, 2, 3, 4)
    assert tinv.tensor_digest("float32", [2, 2], data) == "eb0b2220ce4dd697a9144f5b3ed90080"
    assert tinv.tensor_digest("float32", [4], data) == "e7d537529a115d47db110cdc4d310c9f"
    for shape in ([], [4], [2, 2], [1, 4, 1]):
        assert tinv.tensor_digest("float32", shape, data) == reference_digest("float32", shape, data)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    for seed in (1, 2):
        assert tinv.generate(str(root / f"clean{seed}"), dp=2, tp=2, params=8, steps=4, seed=seed) > 0
    invariants = tinv.infer([root / "clean1", root / "clean2"])
    return root, invariants


def test_infer_and_check(trained):
    root, invariants = trained
    assert invariants["schema"] == tinv.SCHEMA_VERSION
    assert invariants["invariants"]
    tinv.generate(str(root / "held"), dp=2, tp=2, params=8, steps=5, seed=3)
    reports, summary = tinv.check(invariants, root / "held")
    assert reports == [] and summary["reports"] == 0

    tinv.generate(str(root / "bad"), dp=2, tp=2, params=8, steps=5, seed=3, fault="TP_DIVERGENCE@2")
    reports, summary = tinv.check(invariants, root / "bad")
    assert reports and summary["reports"] == len(reports)
    assert min(r["detection_step"] for r in reports) <= 3
    online, _ = tinv.check(invariants, root / "bad", mode="online")
    assert sorted(json.dumps(r, sort_keys=True) for r in online) == sorted(json.dumps(r, sort_keys=True) for r in reports)


def test_manifest(trained):
    _, invariants = trained
    manifest = tinv.required_descriptors(invariants)
    assert manifest["schema"] == tinv.SCHEMA_VERSION
    assert "step" in manifest["meta_keys"]
    assert manifest["apis"] and manifest["vars"]


def test_wire_format_and_errors(trained):
    root, invariants = trained
    text = merged_stream(root / "clean1")
    assert tinv.validate_trace(text) > 0
    with pytest.raises(tinv.MalformedRecord):
        tinv.validate_trace('{"kind":"func_entry"}\n')
    with pytest.raises(tinv.SchemaVersionMismatch):
        tinv.validate_trace('{"kind":"header","schema":2}\n')
    with pytest.raises(tinv.InvalidConfig):
        tinv.generate(str(root / "x"), tp=0)
    with pytest.raises(tinv.Error):
        tinv.check(invariants, root / "missing")
    reports, summary = tinv.check_records(invariants, text)
    assert reports == [] and summary["records"] > 0


def test_faults_and_cli(trained):
    assert len(tinv.faults()) == 6
    code, out, _ = tinv.run_cli(["faults"])
    assert code == 0 and len(json.loads(out)) == 6
    code, _, err = tinv.run_cli(["--schema", "2", "faults"])
    assert code == 2 and "schema" in err


def test_cli_reads_stdin(trained):
    cli = os.environ.get("TINV_CLI")
    if not cli:
        pytest.skip("command-line binary not available")
    root, invariants = trained
    inv = root / "inv.json"
    inv.write_text(json.dumps(invariants))
    tinv.generate(str(root / "stdin_bad"), dp=1, tp=2, params=8, steps=4, seed=5, fault="DUPLICATE_SEED@2")
    text = merged_stream(root / "stdin_bad")
    for mode in ("batch", "online"):
        proc = subprocess.run([cli, "check", "-i", str(inv), "-", "--mode", mode], input=text, text=True,
                              capture_output=True)
        assert proc.returncode == 1, proc.stderr
        lines = [json.loads(l) for l in proc.stdout.splitlines()]
        assert "summary" in lines[-1]
    # Batch mode re-aligns processes by step, so file order does not matter.
    expected, _ = tinv.check(invariants, root / "stdin_bad")
    proc = subprocess.run([cli, "check", "-i", str(inv), "-"], input=text, text=True, capture_output=True)
    got = [json.loads(l) for l in proc.stdout.splitlines()][:-1]
    assert got == expected
