"""The acceptance battery, one test per criterion.

Each test prints its one-line PASS/FAIL verdict (visible with pytest -s or
via `ribbontau suite`) and asserts the criterion's pinned tolerance.  MC
criteria run at the documented 200k samples with fixed seeds.
"""

from ribbontau import suite


def _check(result):
    print(result.line())
    assert result.passed, result.detail


def test_criterion_01_exact_schur_crosscheck():
    _check(suite.criterion_exact_schur())


def test_criterion_02_cauchy_littlewood():
    _check(suite.criterion_cauchy_littlewood())


def test_criterion_03_orthogonality_oracle():
    _check(suite.criterion_orthogonality())


def test_criterion_04_su_q_terms():
    _check(suite.criterion_su_q_terms())


def test_criterion_05_hciz():
    _check(suite.criterion_hciz())


def test_criterion_06_proposition_calibration():
    _check(suite.criterion_calibration())


def test_criterion_07_graph_duality():
    _check(suite.criterion_duality())


def test_criterion_08_gauge_invariance():
    _check(suite.criterion_gauge_invariance())


def test_criterion_09_kp_residual():
    _check(suite.criterion_kp())


def test_criterion_10_bgw_scalar_closure():
    _check(suite.criterion_bgw_scalar())
