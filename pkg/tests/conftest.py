import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_TITLES = {
    1: "decomposition identity vs quadrature oracle",
    2: "finite-difference gradients for every op and loss",
    3: "NLL optimum at sigma^2 = r^2",
    4: "AUC equals Mann-Whitney pair counting",
    5: "stochastic-layer expectations within 3 SE",
    6: "toy benchmark (cycle loss, OOD epistemic)",
    7: "byte-identical reruns through the CLI",
    8: "degenerate runs give zero epistemic maps",
}
_results: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(n: int, ok: bool, detail: str = "") -> bool:
        _results[n] = (bool(ok), detail)
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {ACCEPTANCE_TITLES[n]}" + (f" ({detail})" if detail else "")
        print(line)
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in ACCEPTANCE_TITLES.items():
        if n in _results:
            ok, detail = _results[n]
            status = "PASS" if ok else "FAIL"
        else:
            status, detail = "NOT RUN", ""
        terminalreporter.write_line(f"[{status}] criterion {n}: {title}" + (f" ({detail})" if detail else ""))
