import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_log


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.results:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed in sorted(acceptance_log.results):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {description}")
