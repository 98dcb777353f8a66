from pathlib import Path

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    lines = [ACCEPTANCE_LINES[k] for k in sorted(ACCEPTANCE_LINES)]
    for line in lines:
        terminalreporter.write_line(line)
    if len(lines) == 13:
        Path(__file__).parent.parent.joinpath("acceptance_report.txt").write_text("\n".join(lines) + "\n")
