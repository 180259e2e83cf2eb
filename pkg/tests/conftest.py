from collections import defaultdict

import pytest

CRITERIA = {
    1: "zero-error round trip on the three block configurations, both variants",
    2: "single-block decoder agrees with exhaustive coset search",
    3: "serialized body length equals r_1 t + sum r~_i rho_i",
    4: "rate curves: monotone, ordered, high-precision match, analytic end points",
    5: "example reference set: D_p = 4, p' = 2/7",
    6: "hashing schemes decode exactly; fallback frequency within twice the union bound",
    7: "collision-free fraction non-decreasing in hash length, 1.0 at full rank",
    8: "bounded inner decoding never miscorrects up to 2(d-1)/3",
    9: "outer errors-and-erasures decoding exact within radius, tight at 2e+s = delta",
    10: "decode time n vs 4n grows subquadratically",
}

_outcomes: dict[int, list[tuple[str, str]]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[marker.args[0]].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        ok = all(o == "passed" for _, o in results)
        failed = [name for name, o in results if o != "passed"]
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} - {CRITERIA.get(n, '')}"
        if failed:
            line += f" (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)
