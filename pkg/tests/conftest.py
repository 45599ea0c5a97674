# Collects one verdict line per acceptance criterion and prints them at the end.
ACCEPTANCE_LINES = {}


def record_acceptance(key, ok, detail):
    ACCEPTANCE_LINES[key] = f"{'PASS' if ok else 'FAIL'} {key}: {detail}"
    print(ACCEPTANCE_LINES[key])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
