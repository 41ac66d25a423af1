import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    props = dict(report.user_properties)
    _acceptance.append((props.get("criterion", report.nodeid), report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label, outcome, detail in sorted(_acceptance, key=lambda r: _order(r[0])):
        mark = "PASS" if outcome == "passed" else "FAIL"
        tr.write_line(f"{mark}  {label}" + (f"  ({detail})" if detail else ""))


def _order(label):
    head = label.split(" ", 1)[0].strip("[]")
    return (0, int(head)) if head.isdigit() else (1, label)
