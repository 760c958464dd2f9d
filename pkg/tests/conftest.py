import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, title, detail = results[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {title} ({detail})")
    missing = [n for n in range(1, 11) if n not in results]
    if missing and len(results) < 10 and all(k in range(1, 11) for k in results):
        terminalreporter.write_line(f"not run: {', '.join(map(str, missing))}")
