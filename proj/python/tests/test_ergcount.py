from fractions import Fraction

import pytest

import ergcount


def test_full_support_counts_n_minus_one():
    one = [(1, [(0, 1)])]
    for n in (1, 2, 17, 1000):
        assert ergcount.count_N(one, J=6, x=Fraction(5, 11), n=n) == n - 1


def test_count_matches_brute_force():
    f = [(3, [(Fraction(1, 8), Fraction(3, 8))]), (Fraction(5, 7), [(Fraction(1, 2), Fraction(9, 16))])]
    for J in (1, 4, 9):
        for n in (1, 7, Fraction(50, 3), 400):
            for wrap in (True, False):
                fast = ergcount.count_N(f, J, Fraction(2, 5), n, wrap=wrap)
                slow = ergcount.brute_force_N(f, J, Fraction(2, 5), n, wrap=wrap)
                assert fast == slow


def test_brute_force_cap():
    with pytest.raises(ergcount.CapExceeded):
        ergcount.brute_force_N([(1, [(0, 1)])], 4, 0, 10**7, cap=1000)


def test_gain_constants_and_life_tower():
    assert [ergcount.m_p(p) for p in (2, 3, 4, 5, 8, 16)] == [3, 5, 8, 9, 14, 24]
    assert ergcount.life_tower(5, 5) == [1, 85, 505, 2605, 13105]
    for k, c in enumerate(ergcount.life_tower(4, 4), start=1):
        assert ergcount.nu_compositional(4, k, 11) == 11 + c


def test_base_run_passes():
    doc, artifact, _ = ergcount.run({"command": "base", "sampling": {"random_points": 5}})
    assert artifact is None
    assert doc["schema_version"] == ergcount.schema_version
    rep = doc["payload"]["report"]
    assert rep["summary"]["failures"] == 0
    claims = {c["claim_id"]: c for c in rep["claims"]}
    assert ergcount.parse_rational(claims["f.integral"]["lhs"]) == Fraction(1, 8)
    assert all(c["anchor"] for c in rep["claims"])


def test_negative_control_fails():
    doc, _, _ = ergcount.run({"command": "base", "negative_control": "shift_support", "sampling": {"random_points": 5}})
    failed = {c["anchor"] for c in doc["payload"]["report"]["claims"] if c["status"] == "fail"}
    assert failed == {"base.f.congruence"}


def test_runs_are_deterministic():
    cfg = {"command": "oracle-suite", "seed": 3, "params": {"instances": 20, "max_work": 2000}}
    assert ergcount.run(cfg)[0] == ergcount.run(cfg)[0]


def test_render_and_estimate():
    _, svg, _ = ergcount.run({"command": "render", "params": {"format": "svg"}})
    assert svg.startswith("<svg")
    _, _, est = ergcount.run({"command": "pblock", "estimate_only": True, "params": {"p": 3}})
    assert est["honest"]["M_p"] == 5


def test_errors():
    with pytest.raises(ergcount.ConfigError):
        ergcount.run({"command": "nonsense"})
    with pytest.raises(ergcount.BudgetError):
        ergcount.run({"command": "base", "budgets": {"max_J_bits": 10}})


def test_save_load_round_trip():
    doc = ergcount.save_base({"M": 4})
    assert ergcount.load_base(doc)["J"] == 100
    doc["payload"]["B"][2] = doc["payload"]["B"][3]
    with pytest.raises(ergcount.SchemaError):
        ergcount.load_base(doc)
    doc["schema_version"] = 99
    with pytest.raises(ergcount.SchemaError):
        ergcount.load_base(doc)
