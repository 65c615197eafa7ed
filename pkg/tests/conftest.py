"""Shared pytest wiring: collect acceptance check lines into the run summary."""

ACCEPTANCE_LINES = []


def record_acceptance(ok, label, detail):
    line = "[%s] %s: %s" % ("PASS" if ok else "FAIL", label, detail)
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance checks")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
