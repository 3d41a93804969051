import pytest

from qbtangle.errors import ConfigError
from qbtangle.propagator import StateClass
from qbtangle.verify import (
    DEFAULT_SCENARIOS,
    Scenario,
    Tolerances,
    discrepancy_section,
    evaluate_scenario,
    parse_scenarios,
    verify_report,
)


def test_default_tolerances():
    t = Tolerances()
    assert (t.propagator, t.tangle, t.tau_star) == (1e-8, 1e-10, 1e-6)


def test_default_scenarios_are_the_figures():
    got = {(s.cls, s.omega_hat_sq, s.k) for s in DEFAULT_SCENARIOS}
    assert got == {
        (StateClass.B2, 6.0, 1.0),
        (StateClass.B2, 6.0, 1.59),
        (StateClass.GHZ, 14.0, 1.0),
        (StateClass.GHZ, 14.0, 1.59),
    }


def test_parse_scenarios():
    text = "# header\nname=a class=b2 omega_sq=6 k=1.59\n\nclass=ghz omega_sq=14 k=1 phi=0.3 omega_big=2 search=no  # note\n"
    a, b = parse_scenarios(text, "s.txt")
    assert (a.name, a.cls, a.field, a.search) == ("a", StateClass.B2, None, True)
    assert b.name == "line4" and b.field.phi == 0.3 and b.field.omega_big == 2.0 and not b.search


@pytest.mark.parametrize(
    "text,where",
    [
        ("class=b2 omega_sq=6\n", "s.txt:1"),
        ("\nclass=b2 omega_sq=6 k=x\n", "s.txt:2"),
        ("class=b2 omega_sq=6 k=1 colour=red\n", "s.txt:1"),
        ("class=b2 omega_sq=6 k=1 k=2\n", "s.txt:1"),
        ("class=zz omega_sq=6 k=1\n", "s.txt:1"),
        ("class=b2 omega_sq 6 k=1\n", "s.txt:1"),
        ("# nothing\n", "s.txt"),
    ],
)
def test_parse_scenarios_errors(text, where):
    with pytest.raises(ConfigError, match=where):
        parse_scenarios(text, "s.txt")


def test_known_failure_scenario_flagged():
    rep = evaluate_scenario(Scenario("k2", StateClass.B2, 6.0, 2.0), Tolerances())
    statuses = {c.name: c.status for c in rep.checks}
    assert statuses["plan"] == "KNOWN"
    assert statuses["search_value"] in ("KNOWN", "PASS")
    assert rep.ok
    assert float(rep.info["search_vs_printed_tau_star"]) > 0.1


def test_explicit_field_scenario_without_search():
    sc = parse_scenarios("class=w omega_sq=5 k=0.4 phi=1 omega_big=-1 tau_max=2\n")[0]
    rep = evaluate_scenario(sc, Tolerances(), search=False)
    assert rep.ok
    names = [c.name for c in rep.checks]
    assert names == ["propagator_vs_integrator", "tau13_closed_vs_chain", "tau123_closed_vs_chain", "conservation"]


def test_insufficient_energy_scenario_fails():
    rep = evaluate_scenario(Scenario("bad", StateClass.S, 2.0, 3.0, tau_max=1.0), Tolerances(), search=False)
    assert not rep.ok


def test_discrepancies_without_search():
    ds = {d.key: d for d in discrepancy_section(search=False)}
    assert float(ds["k2_minus"].values["formula_value"]) == pytest.approx(-0.0735, abs=1e-4)
    assert float(ds["branch1_fields"].values["bz_squared"]) == pytest.approx(-1 / 3, abs=1e-12)
    den = ds["branch2_denominator"].values
    assert float(den["min_tau13_printed_denominator"]) == pytest.approx(0.785, abs=1e-3)
    assert float(den["min_tau13_corrected_denominator"]) == pytest.approx(0.567, abs=1e-3)
    assert float(den["tau13_integrator_at_half_tau_star"]) == pytest.approx(
        float(den["min_tau13_corrected_denominator"]), abs=1e-8
    )
    assert float(ds["det_rho_expansions"].values["det_rho2_corrected_max_error"]) < 1e-12
    assert float(ds["three_tangle_normalization"].values["ghz_initial_tau123"]) == pytest.approx(1.0)


def test_report_text_is_deterministic():
    sc = [Scenario("fig3", StateClass.GHZ, 14.0, 1.0, search=False)]
    a = verify_report(sc, search=False).to_text()
    b = verify_report(sc, search=False).to_text()
    assert a == b
    assert "[scenario.fig3]" in a and "[discrepancy.k2_minus]" in a
    assert "# overall: PASS" in a


def test_empty_scenarios_rejected():
    with pytest.raises(ValueError):
        verify_report([])
