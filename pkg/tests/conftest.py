from __future__ import annotations


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for code in sorted(RESULTS, key=lambda c: int(c[1:])):
        terminalreporter.write_line(RESULTS[code])
