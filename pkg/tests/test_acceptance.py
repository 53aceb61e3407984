"""One test per acceptance criterion; verdict lines are echoed in the terminal summary."""
import pytest

from conftest import ACCEPTANCE_LINES
from weylcov import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    result = acceptance.CRITERIA[number]()
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line
