"""The numbered acceptance criteria, each at its stated tolerance."""
import time

import pytest

from thintube.acceptance import Suite

NAMES = {
    1: "flat_exactness", 2: "circle_oracle", 3: "sphere_oracle", 4: "trend", 5: "strong_coupling",
    6: "sandwich", 7: "dirichlet", 8: "neumann", 9: "eigensolver", 10: "localization",
    11: "determinism",
}


@pytest.fixture(scope="module")
def suite():
    return Suite()


@pytest.mark.parametrize("number", sorted(NAMES), ids=[f"{n:02d}-{NAMES[n]}" for n in sorted(NAMES)])
def test_criterion(number, suite, acceptance_log, tmp_path):
    step = getattr(suite, NAMES[number])
    started = time.perf_counter()
    result = step(scratch=tmp_path) if number == 11 else step()
    result.elapsed = time.perf_counter() - started
    line = result.line()
    acceptance_log.append(line)
    print(line)
    assert result.passed, line
