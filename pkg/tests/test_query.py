import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsim import QuerySpec, Scenario, TickEntry, action, decide_query, load_system, parse_scenario, run_scenario
from mcsim.query import EXISTS, FORALL

import generators
from conftest import A


def test_target_already_believed():
    sys_ = load_system("context c { kb { p(a). } }")
    res = decide_query(sys_, QuerySpec("c", A("p(a)"), 1))
    assert res.answer and res.witness == 1
    assert res.witness_digest == res.table[0].digest


def test_help_asked_follows_rule_completion(system_of, corpus):
    sys_ = system_of("bob.mcx")
    sc = parse_scenario(corpus("bob.mcxs")).to_scenario()
    horizon = 8
    actions = [(sc.at(t).actions if sc.at(t) else {}) for t in range(1, horizon + 1)]
    target = A("help_asked(bob,[chestpain],3,3,15,ambulance)")
    res = decide_query(sys_, QuerySpec("pma_bob", target, horizon, actions))
    # replay oracle: first equilibrium tick whose logged belief set holds the target
    log = run_scenario(sys_, sc, mode="sync", horizon=horizon).events
    eq = {e.tick for e in log if e.kind == "equilibrium" and e.detail == "true"}
    hits = [e.tick for e in log if e.kind == "beliefs" and e.ctx == "pma_bob" and str(target) in e.detail]
    assert res.answer and res.witness == min(t for t in hits if t in eq) == 4
    completed = [e.tick for e in log if e.kind == "apply" and "help_asked" in e.detail]
    assert res.witness == completed[0]


def test_underivable_target_reports_exhaustion():
    sys_ = load_system("context c { kb { p(a). } }")
    res = decide_query(sys_, QuerySpec("c", A("never(a)"), 3))
    assert not res.answer and res.witness is None
    assert len(res.table) == 3 and res.report


def test_forall_counterexample_and_vacuous_truth(system_of):
    sys_ = load_system("context c { kb { p(a). } }")
    actions = [{}, {"c": [action("retract", A("p(a)"))]}, {}]
    res = decide_query(sys_, QuerySpec("c", A("p(a)"), 3, actions, FORALL))
    assert not res.answer and res.witness == 2
    # even/odd keeps growing, so no time point is an equilibrium
    vac = decide_query(system_of("evenodd.mcx"), QuerySpec("c1", A("q(z)"), 3, mode=FORALL))
    assert vac.answer and any("vacuously" in r for r in vac.report)


def test_query_spec_validation():
    with pytest.raises(ValueError):
        QuerySpec("c", A("p(a)"), 0)
    with pytest.raises(ValueError):
        QuerySpec("c", A("p(X)"), 1)
    with pytest.raises(ValueError):
        QuerySpec("c", A("p(a)"), 1, mode="sometimes")
    with pytest.raises(ValueError):
        QuerySpec("c", A("p(a)"), 1, [{}, {}])
    with pytest.raises(ValueError):
        decide_query(load_system("context c { }"), QuerySpec("ghost", A("p(a)"), 1))


def _random_spec(rng, desc, mode):
    names = sorted(desc)
    horizon = rng.randint(1, 6)
    actions = [generators.random_actions(rng, names, 0.4) for _ in range(horizon)]
    target = generators.atom(generators.ground_atom(rng))
    return QuerySpec(rng.choice(names), target, horizon, actions, mode)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_forall_implies_exists(seed):
    rng = random.Random(seed)
    desc = generators.random_description(rng, negation=True)
    sys_ = generators.build(desc)
    spec = _random_spec(rng, desc, FORALL)
    univ = decide_query(sys_, spec)
    ex = decide_query(sys_, QuerySpec(spec.ctx, spec.belief, spec.horizon, spec.actions, EXISTS))
    if any(r.equilibrium for r in univ.table) and univ.answer:
        assert ex.answer


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_isolated_context_does_not_change_answer(seed):
    rng = random.Random(seed)
    desc = generators.random_description(rng, max_contexts=3, negation=True)
    spec = _random_spec(rng, desc, rng.choice((EXISTS, FORALL)))
    # an extra context nobody queries, reading only itself and settled from t=1 on
    extended = dict(desc)
    extended["z"] = {"facts": {("p", "a")}, "rules": [], "bridge": [(("q", "X"), [(None, ("p", "X"), False)])]}
    small = decide_query(generators.build(desc), spec)
    big = decide_query(generators.build(extended), spec)
    assert (small.answer, small.witness) == (big.answer, big.witness)


def test_query_is_deterministic(system_of):
    sys_ = system_of("threshold.mcx")
    spec = QuerySpec("c1", A("nat(succ(succ(0)))"), 4)
    assert decide_query(sys_, spec, 3).lines() == decide_query(sys_, spec, 3).lines()
    assert decide_query(sys_, spec).as_dict()["answer"] is True


def test_run_scenario_sync_matches_step_by_step(system_of):
    sys_ = system_of("nat.mcx")
    res = run_scenario(sys_, Scenario([TickEntry(1)]), mode="sync", horizon=3)
    assert [e.tick for e in res.events if e.kind == "equilibrium"] == [1, 2, 3]
