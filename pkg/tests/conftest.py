from fractions import Fraction

import pytest

from gapdim import Function, FunctionClass, IntervalUnion


@pytest.fixture
def ramp8() -> Function:
    """Identity ramp discretized on dyadic eighths, value = left endpoint."""
    pieces = [
        IntervalUnion.interval(Fraction(j, 8), Fraction(j + 1, 8)) for j in range(8)
    ]
    return Function.step(pieces, [Fraction(j, 8) for j in range(8)])


@pytest.fixture
def zero_one_class() -> FunctionClass:
    return FunctionClass(
        [Function.constant(0), Function.constant(1)], "constants01"
    )
