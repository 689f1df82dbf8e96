import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from funcdist.panel import FIRM_FIELDS

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def firm_row(**over):
    row = dict(firm_id="A1", year=2000, industry_id=5, total_assets=100.0, capex=4.0,
               st_debt=10.0, lt_debt=20.0, employees=0.5, ppent=30.0, adv_expense=1.0,
               rd_expense=2.0, shares_outstanding=15.0, price_close=10.0, common_equity=50.0,
               deferred_taxes=0.0, oibdp=12.0, interest_expense=2.0, income_taxes=3.0)
    row.update(over)
    return row


def write_rows(path, rows, fields=FIRM_FIELDS):
    lines = [",".join(fields)]
    for r in rows:
        lines.append(",".join(str(r.get(f, "")) for f in fields))
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one pass/fail line per acceptance criterion, printed after the run
_CRITERIA: dict = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    num, title = mark.args
    entry = _CRITERIA.setdefault(num, {"title": title, "passed": 0, "failed": [], "details": []})
    if call.excinfo is None:
        entry["passed"] += 1
    else:
        entry["failed"].append(item.name)
    entry["details"] += [v for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "PASS" if not e["failed"] else "FAIL"
        total = e["passed"] + len(e["failed"])
        tr.write_line(f"{status} criterion {num}: {e['title']} ({e['passed']}/{total} checks)")
        for d in e["details"]:
            tr.write_line(f"       {d}")
        for name in e["failed"]:
            tr.write_line(f"       failed: {name}")
