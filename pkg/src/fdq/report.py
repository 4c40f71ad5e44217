"""Verification reports: one record per check, in the order they ran."""

import logging
import time
from contextlib import contextmanager
from typing import Iterator, Literal, Optional

from jinja2 import Environment
from pydantic import BaseModel, computed_field


logger = logging.getLogger(__name__)


SUMMARY_TEMPLATE = """\
{{ report.title }}: {{ report.status | upper }} ({{ report.passed_count }}/{{ report.checks | length }} checks, {{ "%.2f" | format(report.elapsed) }}s)
{% for check in report.checks -%}
  [{{ "ok" if check.status == "passed" else "FAIL" }}] {{ check.name }}{% if check.order is not none %} @ order {{ check.order }}{% endif %}
{%- if check.witness %}
        witness: {{ check.witness }}
{%- endif %}
{%- if check.detail %}
        {{ check.detail }}
{%- endif %}
{% endfor -%}
"""

_environment = Environment(trim_blocks=False, lstrip_blocks=False, keep_trailing_newline=True)


class Check(BaseModel):
    name: str
    status: Literal["passed", "failed"]
    order: Optional[int] = None
    witness: Optional[str] = None
    detail: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == "passed"


class Report(BaseModel):
    title: str
    checks: list[Check] = []
    elapsed: float = 0.0

    @computed_field
    @property
    def status(self) -> Literal["passed", "failed"]:
        return "passed" if all(check.passed for check in self.checks) else "failed"

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    @property
    def passed_count(self) -> int:
        return sum(check.passed for check in self.checks)

    def record(
        self,
        name: str,
        passed: bool,
        order: Optional[int] = None,
        witness: Optional[str] = None,
        detail: Optional[str] = None,
    ) -> Check:
        check = Check(name=name, status="passed" if passed else "failed", order=order, witness=witness, detail=detail)
        if not passed:
            logger.warning("Check %s failed at order %s: %s", name, order, witness)
        self.checks.append(check)
        return check

    def extend(self, other: "Report") -> "Report":
        self.checks.extend(other.checks)
        self.elapsed += other.elapsed
        return self

    def first_failure(self) -> Optional[Check]:
        return next((check for check in self.checks if not check.passed), None)

    @contextmanager
    def timed(self) -> Iterator["Report"]:
        start = time.perf_counter()
        try:
            yield self
        finally:
            self.elapsed += time.perf_counter() - start

    def summary(self) -> str:
        return _environment.from_string(SUMMARY_TEMPLATE).render(report=self)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)
