import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import _verdicts  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if _verdicts.LINES:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts.LINES:
            terminalreporter.write_line(line)
