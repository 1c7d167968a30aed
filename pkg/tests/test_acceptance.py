"""The ten acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are repeated in the
terminal summary (see conftest.py).
"""

import time

import pytest

from growthlab import selftest
from growthlab.tower import default_tower

CRITERIA = [
    (1, "Abel construction of Xi_3 (real and tower grids)", selftest.check_abel_relation),
    (2, "C1 glue of Xi_3 at x = e", selftest.check_c1_glue),
    (3, "half and third iterates of exp", selftest.check_half_iterate),
    (4, "orders of 3x, x^2, e_2 and the half iterate", selftest.check_orders),
    (5, "classification table", selftest.check_table),
    (6, "h < ell < g and g above order 0 log-exp increments", selftest.check_example_ordering),
    (7, "Ackermann values and G_m Abel relation", lambda tw: selftest.check_ackermann()),
    (8, "chi_3 consistency and quadrature", selftest.check_chi),
    (9, "order additivity", selftest.check_additivity),
    (10, "TowerReal randomized properties", lambda tw: selftest.check_towerreal()),
]


@pytest.mark.parametrize("num, title, check", CRITERIA, ids=[f"criterion{c[0]}" for c in CRITERIA])
def test_criterion(num, title, check, acceptance_report):
    t0 = time.perf_counter()
    ok, detail = check(default_tower())
    line = f"{'PASS' if ok else 'FAIL'} criterion {num} ({title}): {detail} [{time.perf_counter() - t0:.2f}s]"
    print(line)
    acceptance_report.append(line)
    assert ok, line
