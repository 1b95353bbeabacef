"""The README command examples, run end to end and compared with golden records.

Set CAPPROX_REGEN_GOLDEN=1 to rewrite tests/golden/ from the current code.
"""

import json
import math
import os
import re
import shlex
import subprocess
import sys
from pathlib import Path

import pytest

from capprox import cli, io

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = Path(__file__).with_name("golden")
REGEN = os.environ.get("CAPPROX_REGEN_GOLDEN") == "1"


def readme_commands():
    text = (ROOT / "README.md").read_text()
    blocks = re.findall(r"```console\n(.*?)```", text, re.S)
    block = next(b for b in blocks if "capprox shape" in b)
    out = []
    for line in block.splitlines():
        if not line.startswith("$ capprox "):
            continue
        expected = 0
        m = re.search(r"#\s*exit (\d+)", line)
        if m:
            expected = int(m.group(1))
        argv = shlex.split(line[len("$ capprox "):], comments=True)
        out.append((argv, expected))
    return out


COMMANDS = readme_commands()


def _close(a, b, path="$"):
    if isinstance(a, dict) and isinstance(b, dict):
        assert sorted(a) == sorted(b), f"{path}: keys {sorted(a)} != {sorted(b)}"
        for k in a:
            _close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list) and isinstance(b, list):
        assert len(a) == len(b), f"{path}: length {len(a)} != {len(b)}"
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    elif isinstance(a, (int, float)) and isinstance(b, (int, float)) and not isinstance(a, bool):
        # tiny quadrature residues (~1e-17) are compared absolutely
        assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-13), f"{path}: {a} != {b}"
    else:
        assert a == b, f"{path}: {a!r} != {b!r}"


@pytest.fixture(scope="module")
def readme_run(tmp_path_factory):
    """Run every README command in order inside one scratch directory."""
    work = tmp_path_factory.mktemp("readme")
    cwd = os.getcwd()
    os.chdir(work)
    try:
        records = [cli.run(argv) for argv, _ in COMMANDS]
    finally:
        os.chdir(cwd)
    return work, records


def test_readme_has_examples():
    assert len(COMMANDS) >= 15
    assert any(code != 0 for _, code in COMMANDS)


@pytest.mark.parametrize("index", range(len(COMMANDS)), ids=[" ".join(a[:1]) + f"-{i}" for i, (a, _) in
                                                             enumerate(COMMANDS)])
def test_readme_command(readme_run, index):
    argv, expected = COMMANDS[index]
    _, records = readme_run
    record, code = records[index]
    assert code == expected, record.get("error")
    assert record["exit_code"] == code
    assert record["status"] == ("ok" if code == 0 else "error")
    assert record["subcommand"] == argv[0]
    # the record is valid JSON under the shortest-roundtrip encoder
    text = io.dumps(record)
    assert json.loads(text)["outputs"] == json.loads(io.dumps(record["outputs"]))

    name = GOLDEN / f"{index:02d}_{argv[0]}.json"
    payload = json.loads(io.dumps({"argv": argv, "exit_code": code, "outputs": record["outputs"],
                                   "error": record.get("error")}))
    if REGEN:
        GOLDEN.mkdir(exist_ok=True)
        name.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    assert name.exists(), f"missing golden file {name.name}; run with CAPPROX_REGEN_GOLDEN=1"
    golden = json.loads(name.read_text())
    assert golden["argv"] == argv, "README command changed; regenerate the golden files"
    _close(payload, golden)


def test_readme_files_written(readme_run):
    work, _ = readme_run
    for argv, code in COMMANDS:
        if code == 0 and "--out" in argv:
            target = work / argv[argv.index("--out") + 1]
            assert target.exists()
            json.loads(target.read_text())


def test_written_net_roundtrips_byte_stable(readme_run):
    work, _ = readme_run
    text = (work / "disk.json").read_text()
    K = io.load_net(work / "disk.json")
    assert io.dumps(K.to_json()) + "\n" == text


def test_schema_error_names_field(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 1, "mesh": -0.1, "points": [[0, 0]]}')
    record, code = cli.run(["hull", "--k", str(bad), "--deg", "1", "--height", "1"])
    assert code == 2
    assert record["error"]["type"] == "SchemaError"
    assert record["error"]["path"] == ".mesh"


def test_point_width_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 1, "mesh": 0.1, "points": [[0, 0], [1, 2, 3]]}')
    record, code = cli.run(["image", "--k", str(bad), "--f", "z"])
    assert code == 2
    assert record["error"]["path"] == ".points[1]"


def test_missing_file_is_io_error(tmp_path):
    record, code = cli.run(["hausdorff", "--a", str(tmp_path / "nope.json"), "--b", str(tmp_path / "nope.json")])
    assert code == 4
    assert record["error"]["type"] == "CapproxIOError"


def test_unknown_subcommand():
    record, code = cli.run(["frobnicate"])
    assert code == 2
    assert record["status"] == "error"


def test_missing_subcommand():
    _, code = cli.run([])
    assert code == 2


def test_bad_expression_is_argument_error(tmp_path):
    _, code = cli.run(["taylor", "--f", "exp(z", "--degree", "3"])
    assert code == 2


def test_log_refused_without_flag():
    record, code = cli.run(["taylor", "--f", "log(z+2)", "--degree", "3", "--rho", "1"])
    assert code == 2
    ok, code = cli.run(["taylor", "--f", "log(z+2)", "--degree", "3", "--rho", "1", "--assume-holomorphic"])
    assert code == 0


def test_select_failure_reports_atoms():
    # eps far below what 25 indices with offsets up to 5 can reach
    record, code = cli.run(["select", "--eps", "1e-300", "--outcomes", "10", "--atoms", "3"])
    assert code == 3
    assert record["error"]["type"] == "SelectionError"
    assert record["error"]["atoms"]


def test_threads_flag_does_not_change_outputs():
    one, _ = cli.run(["--threads", "1", "select", "--eps", "1e-6", "--outcomes", "20"])
    many, _ = cli.run(["--threads", "4", "select", "--eps", "1e-6", "--outcomes", "20"])
    assert io.dumps(one["outputs"]) == io.dumps(many["outputs"])


def test_bad_threads_value():
    _, code = cli.run(["--threads", "0", "select"])
    assert code == 2


def test_python_dash_m(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "capprox", "shape", "--kind", "circle", "--radius", "1",
                           "--h", "0.5"], capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    record = json.loads(proc.stdout)
    assert record["status"] == "ok"
    assert proc.stdout.count("\n") == 1
    assert list(tmp_path.iterdir()) == []

    proc = subprocess.run([sys.executable, "-m", "capprox", "hull", "--k", "missing.json", "--deg", "1",
                           "--height", "1"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 4
    assert json.loads(proc.stdout)["exit_code"] == 4
