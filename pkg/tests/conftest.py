import time

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


class Criterion:
    """Timed acceptance check that reports one PASS/FAIL line."""

    def __init__(self, lines, number, title, budget):
        self.lines, self.number, self.title, self.budget = lines, number, title, budget
        self.start = time.perf_counter()
        self.reported = False

    def _line(self, passed, detail):
        elapsed = time.perf_counter() - self.start
        tag = "PASS" if passed else "FAIL"
        return elapsed, f"criterion {self.number:2d} {tag}  {self.title}: {detail} [{elapsed:.1f}s of {self.budget:g}s]"

    def verdict(self, ok, detail):
        elapsed, line = self._line(ok and time.perf_counter() - self.start <= self.budget, detail)
        self.lines.append(line)
        self.reported = True
        print(line)
        assert ok, line
        assert elapsed <= self.budget, line


@pytest.fixture
def criterion(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])
    made = []

    def factory(number, title, budget):
        c = Criterion(lines, number, title, budget)
        made.append(c)
        return c

    yield factory
    for c in made:
        if not c.reported:
            lines.append(c._line(False, "raised before reaching a verdict")[1])


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
