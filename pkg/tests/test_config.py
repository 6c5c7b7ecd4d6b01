from fractions import Fraction as F

import pytest
from pydantic import ValidationError

from app.config import Settings


def test_defaults():
    s = Settings(_env_file=None)
    assert s.delta == 1
    assert s.epsilon == F(1, 1000)
    assert s.iteration_budget(3) == 90


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("PTSDIST_DEFAULT_DELTA", "1/2")
    monkeypatch.setenv("PTSDIST_WORKERS", "3")
    s = Settings(_env_file=None)
    assert s.delta == F(1, 2)
    assert s.workers == 3


def test_decimal_rationals_are_rejected():
    with pytest.raises(ValidationError):
        Settings(_env_file=None, default_epsilon="0.001")
