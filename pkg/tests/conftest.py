import os

import pytest

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "src", "logcleaner", "data")
HDFS_LOG = os.path.abspath(os.path.join(DATA, "hdfs_1k.log"))
HDFS_LABELS = os.path.abspath(os.path.join(DATA, "hdfs_1k_labels.csv"))
BGL_LOG = os.path.abspath(os.path.join(DATA, "bgl_1k.log"))


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8", newline="\n")
        return str(p)
    return _write


# acceptance criteria report one line each; printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
