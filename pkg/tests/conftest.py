"""Collects acceptance verdicts and prints them as one line per criterion."""

ACCEPTANCE = {}
N_CRITERIA = 11


def record(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        terminalreporter.write_line(ACCEPTANCE.get(k, f"criterion {k:2d}: FAIL  not reached"))
