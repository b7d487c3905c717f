import mpmath as mp
import pytest

from knds_spectral import SpacetimeParams

REFERENCE = SpacetimeParams(1.0, 0.1, 0.1, 0.05)

_acceptance_lines = []


def record_criterion(number, name, passed, detail=""):
    _acceptance_lines.append(f"[criterion {number}] {'PASS' if passed else 'FAIL'} {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reference_params():
    return REFERENCE


def mp_horizon_roots(m, a, q, lam, dps=50):
    """Real roots of Delta_r in high precision, ascending (independent of the package)."""
    with mp.workdps(dps):
        m, a, q, lam = (mp.mpf(float(v)) for v in (m, a, q, lam))
        roots = mp.polyroots(
            [-lam / 3, 0, 1 - lam * a**2 / 3, -2 * m, a**2 + q**2], maxsteps=500, extraprec=4 * dps
        )
        real = sorted(mp.re(r) for r in roots if abs(mp.im(r)) < mp.mpf(10) ** (-dps // 2))
        return [float(r) for r in real]


def mp_traces(m, a, q, lam, dps=50):
    """(gamma0_e, gamma1_e, gamma0_c, gamma1_c) from the literal formulas in high precision."""
    with mp.workdps(dps):
        m, a, q, lam = (mp.mpf(float(v)) for v in (m, a, q, lam))
        roots = mp.polyroots(
            [-lam / 3, 0, 1 - lam * a**2 / 3, -2 * m, a**2 + q**2], maxsteps=500, extraprec=4 * dps
        )
        real = sorted(mp.re(r) for r in roots if abs(mp.im(r)) < mp.mpf(10) ** (-dps // 2))
        r_e, r_c = real[-2], real[-1]
        xi = (lam * a**2 / 3) / (1 + lam * a**2 / 3)
        u = mp.sqrt(xi / (1 - xi))
        g = (mp.atan(u) / u - 1) / xi
        out = []
        for r in (r_e, r_c):
            eta2 = r**2 + a**2
            b2 = a**2 / eta2
            out += [eta2 * (1 - b2 + (xi - b2) * g), eta2 * (1 - xi)]
        return [float(v) for v in out]
