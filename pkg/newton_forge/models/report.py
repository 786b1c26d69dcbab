from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from newton_forge.utils.rational import format_rational, to_decimal_string


def exact_and_decimal(value, digits=12) -> dict:
    """A rational in both renderings: {"exact": "2/3", "decimal": "0.666666666667"}."""
    return {'exact': format_rational(value), 'decimal': to_decimal_string(value, digits)}


def render_value(value, digits=12):
    """Recursively render Fractions inside dicts and lists as exact/decimal pairs."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return exact_and_decimal(value, digits)
    if isinstance(value, dict):
        return {key: render_value(item, digits) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [render_value(item, digits) for item in value]
    if hasattr(value, 'to_dict'):
        return value.to_dict()
    return value


@dataclass
class CheckResult:
    """
    One assertion on one fixture.

    Attributes:
        suite (str): Suite name, e.g. 'duality'.
        fixture (str): Fixture id; results are ordered by (suite, fixture, name).
        name (str): What was checked.
        passed (bool): Outcome.
        value (Fraction, optional): The exact quantity the check is about.
        detail (dict): Extra payload (witnesses, counts, ...).
    """

    suite: str
    fixture: str
    name: str
    passed: bool
    value: Fraction = None
    detail: dict = field(default_factory=dict)

    def sort_key(self):
        return (self.suite, self.fixture, self.name)

    def to_dict(self, digits=12) -> dict:
        data = {
            'suite': self.suite,
            'fixture': self.fixture,
            'name': self.name,
            'passed': self.passed,
        }
        if self.value is not None:
            data['value'] = exact_and_decimal(self.value, digits)
        if self.detail:
            data['detail'] = render_value(self.detail, digits)
        return data

    def to_row(self, digits=12) -> dict:
        """Flat record for CSV / XLSX tables."""
        return {
            'suite': self.suite,
            'fixture': self.fixture,
            'check': self.name,
            'passed': self.passed,
            'exact': format_rational(self.value) if self.value is not None else '',
            'decimal': to_decimal_string(self.value, digits) if self.value is not None else '',
        }


@dataclass
class RunReport:
    """
    Everything one CLI invocation produced.

    Attributes:
        command (str): The command line echoed back.
        seed (int, optional): Seed of the run's generator.
        checks (list): CheckResult items.
        results (dict): Command output (artifacts, values).
        timing (dict, optional): Wall-clock seconds per suite; only with --timing.
    """

    command: str
    seed: int = None
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    timing: dict = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, check: CheckResult):
        self.checks.append(check)

    def extend(self, checks):
        self.checks.extend(checks)

    def sorted_checks(self):
        return sorted(self.checks, key=CheckResult.sort_key)

    def fixture_ids(self):
        return sorted({check.fixture for check in self.checks})

    def failures(self):
        return [check for check in self.sorted_checks() if not check.passed]

    def to_dict(self, digits=12) -> dict:
        data = {
            'command': self.command,
            'seed': self.seed,
            'passed': self.passed,
            'fixtures': self.fixture_ids(),
            'checks': [check.to_dict(digits) for check in self.sorted_checks()],
            'results': render_value(self.results, digits),
        }
        if self.timing is not None:
            data['timing'] = {key: round(seconds, 3) for key, seconds in sorted(self.timing.items())}
        return data

    def rows(self, digits=12):
        return [check.to_row(digits) for check in self.sorted_checks()]
