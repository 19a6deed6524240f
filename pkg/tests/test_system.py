import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsim import (System, action, app, dump, grounded_equilibrium, initial_state, is_equilibrium,
                   is_timed_equilibrium, load_system, step)
from mcsim.system import SYSTEM, StepError, ValidationError, digest, iterate_data_states

import generators
import oracles
from conftest import A


def texts(belief):
    return {str(a) for a in belief}


def nat_facts(belief):
    return {oracles.parse(str(a)) for a in belief if a.pred == "nat"}


# -- initial state ---------------------------------------------------------

def test_initial_state_nat(system_of):
    s = initial_state(system_of("nat.mcx"))
    assert texts(s.beliefs["c1"]) == {"nat(0)"}
    assert texts(s.beliefs["c2"]) == set()
    assert s.T == 0


def test_initial_state_threshold(system_of):
    s = initial_state(system_of("threshold.mcx"))
    assert texts(s.beliefs["c1"]) == {"nat(0)", "count(0)", "threshold(2)"}


def test_initial_state_empty_system():
    s = initial_state(System({}))
    assert s.beliefs == {}


def test_invalid_system_rejected():
    from mcsim import Context
    sys_ = System({"c": Context("c", mng="nope")})
    with pytest.raises(ValidationError):
        initial_state(sys_)


# -- grounded equilibria ---------------------------------------------------

def test_nat_grade_one(system_of):
    res = grounded_equilibrium(system_of("nat.mcx"), 1)
    c2 = res.state.beliefs["c2"]
    assert nat_facts(c2) == {("nat", oracles.numeral(k)) for k in range(4)}
    assert c2.truncated and res.steps == 1


def test_threshold_fixpoint(system_of):
    sys_ = system_of("threshold.mcx")
    res = grounded_equilibrium(sys_, None)
    assert res.reached_fixpoint and res.steps <= 6
    b = res.state.beliefs
    assert nat_facts(b["c1"]) == oracles.THRESHOLD_2["c1"]
    assert nat_facts(b["c2"]) == oracles.THRESHOLD_2["c2"]
    for n in ("c1", "c2"):
        assert A(f"count({oracles.THRESHOLD_2['counts'][n]})") in b[n]
    assert is_equilibrium(res.state)


def test_no_bridge_rules_fixpoint_after_one_round():
    sys_ = load_system("context c { kb { p(a). q(X) <- p(X). } }")
    res = grounded_equilibrium(sys_, None)
    assert res.reached_fixpoint and res.steps == 1
    assert res.state.beliefs == initial_state(sys_, reactive=True).beliefs


def test_grade_must_be_positive(system_of):
    with pytest.raises(ValueError):
        grounded_equilibrium(system_of("nat.mcx"), 0)


def test_even_odd_cap_without_fixpoint(system_of):
    sys_ = system_of("evenodd.mcx")
    res = grounded_equilibrium(System(sys_.contexts, config=type(sys_.config)(cap=30)), None)
    assert not res.reached_fixpoint and res.steps == 30
    c1, c2 = oracles.evenodd_after(30)
    assert nat_facts(res.state.beliefs["c1"]) == c1
    assert nat_facts(res.state.beliefs["c2"]) == c2


def test_is_equilibrium_examples(system_of):
    assert not is_equilibrium(initial_state(system_of("nat.mcx"), reactive=True))
    single = load_system("context c { kb { p(a). } }")
    assert is_equilibrium(initial_state(single, reactive=True))


def test_unbounded_nonmonotonic_request_warns(system_of, caplog):
    grounded_equilibrium(system_of("threshold.mcx"), None)
    assert "non-monotonic" in caplog.text


EXTENDED = """
context c1 { kb { nat(0). }
  bridge { br1: add(nat(succ(X))) <- c2:nat(X), not c1:never(X); } }
context c2 { bridge { br2: add(nat(succ(X))) <- c1:nat(X), not c2:never(X); } }
"""


def test_vacuous_negation_keeps_equilibrium(system_of):
    plain = grounded_equilibrium(system_of("evenodd.mcx"), 12).state.beliefs
    extended = grounded_equilibrium(load_system(EXTENDED), 12).state.beliefs
    for n in ("c1", "c2"):
        assert nat_facts(plain[n]) == nat_facts(extended[n])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_monotone_growth_during_iteration(seed):
    rng = random.Random(seed)
    sys_ = generators.build(generators.random_description(rng))
    states = iterate_data_states(sys_)
    prev = next(states)
    for _ in range(6):
        nxt = next(states)
        for n in sys_.contexts:
            assert prev.contexts[n].kb.facts <= nxt.contexts[n].kb.facts
            assert prev.beliefs[n].atoms <= nxt.beliefs[n].atoms
        prev = nxt


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_fixpoint_matches_reference_iteration(seed):
    rng = random.Random(seed)
    desc = generators.random_description(rng)
    res = grounded_equilibrium(generators.build(desc), None)
    expected, fixpoint = oracles.naive_grounded(desc)
    assert res.reached_fixpoint and fixpoint
    for n in desc:
        assert {oracles.parse(str(a)) for a in res.state.beliefs[n]} == expected[n]


# -- timed steps -----------------------------------------------------------

def test_step_without_actions_only_advances_time():
    sys_ = load_system("context c { kb { p(a). } } context d { bridge { r: add(q(X)) <- c:p(X); trigger: go; } }")
    s0 = initial_state(sys_)
    s1 = step(s0, {})
    assert s1.T == 1
    assert s1.beliefs == s0.beliefs and s1.contexts == s0.contexts and s1.grtr == s0.grtr


def test_anticoagulant_fires_after_update(system_of):
    s0 = initial_state(system_of("bob.mcx"))
    s1 = step(s0, {"pma_bob": [action("assert", A("coagulation_val(32,4)"))]})
    assert any(r.rule_id == "anticoagulant" for r in s1.grtr["pma_bob"])
    assert A("quantity(anticoagulant,5)") not in s1.beliefs["pma_bob"]
    s2 = step(s1, {})
    assert A("quantity(anticoagulant,5)") in s2.beliefs["pma_bob"]
    assert any(e.kind == "apply" and "quantity" in e.detail for e in s2.events)


DIR_SYSTEM = """
context asker { bridge { ask: add(found(X)) <- helper@Dir:p(X); } }
context c2 { kb { p(a). } }
dir { members: asker, c2; }
"""


def test_directory_registration_resolves_next_step():
    s0 = initial_state(load_system(DIR_SYSTEM))
    s1 = step(s0, {SYSTEM: [action("dir_register", A("helper"), A("c2"))]})
    assert s1.dir.lookup("helper") == ["c2"]
    assert A("found(a)") not in s1.beliefs["asker"]
    s2 = step(s1, {})
    assert A("found(a)") in s2.beliefs["asker"]
    assert any(e.kind == "role_unresolved" for e in s1.events)


def test_left_context_makes_literals_fail():
    sys_ = load_system("context c { kb { p(a). } } context d { bridge { r: add(q(X)) <- c:p(X); } }")
    s1 = step(initial_state(sys_), {SYSTEM: [action("dir_leave", A("c"))]})
    s2 = step(s1, {})
    assert A("q(a)") in s1.beliefs["d"]  # applied from the state before the leave
    assert is_timed_equilibrium(s2)
    assert set(app(s2)["d"]) == set()


def test_undeclared_action_aborts_step(system_of):
    s0 = initial_state(system_of("bob.mcx"))
    before = dump(s0)
    with pytest.raises(StepError) as exc:
        step(s0, {"pma_bob": [action("assert", A("p(a)"))], "drA": [action("launch", A("p(a)"))]})
    assert exc.value.ctx == "drA"
    assert dump(s0) == before
    with pytest.raises(StepError):
        step(s0, {"nowhere": []})


def test_triggered_rule_stays_triggered():
    sys_ = load_system("context c { bridge { r: add(done(X)) <- item(X); trigger: go; } }")
    plan = {3: [action("assert", A("go"))], 4: [action("retract", A("go"))],
            5: [action("assert", A("item(a)"))]}
    s = initial_state(sys_)
    history = []
    for t in range(1, 7):
        s = step(s, {"c": plan.get(t, [])})
        history.append(s)
    ids = [{r.rule_id for r in h.grtr["c"]} for h in history]
    assert ids == [set(), set(), {"r"}, {"r"}, {"r"}, {"r"}]
    assert [A("done(a)") in h.beliefs["c"] for h in history] == [False] * 5 + [True]
    for a, b in zip(history, history[1:]):
        assert a.grtr["c"] <= b.grtr["c"]


def test_timed_equilibrium_examples():
    sys_ = load_system("context c1 { bridge { r: add(seen(X)) <- c2:p(X); } } context c2 { }")
    s0 = initial_state(sys_)
    assert is_timed_equilibrium(s0)
    s1 = step(s0, {"c2": [action("assert", A("p(a)"))]})
    assert not is_timed_equilibrium(s1)
    s2 = step(s1, {})
    assert is_timed_equilibrium(s2) and A("seen(a)") in s2.beliefs["c1"]


def test_rules_grow_monotonically_and_runs_repeat(system_of, corpus):
    from mcsim import parse_scenario
    sys_ = system_of("bob.mcx")
    script = parse_scenario(corpus("bob.mcxs")).to_scenario()

    def run():
        s = initial_state(sys_)
        out = []
        for t in range(1, 10):
            entry = script.at(t)
            nxt = step(s, entry.actions if entry else {}, seed=7)
            for n in s.contexts:
                assert set(s.contexts[n].rules) <= set(nxt.contexts[n].rules)
            s = nxt
            out.append(dump(s))
        return out, digest(s)

    first, second = run(), run()
    assert first == second
    dumps = first[0]
    # patterns instantiate from the beliefs at T, so the instance shows at T+1
    assert "call_physician[drHouse]" not in dumps[0]
    assert "call_physician[drHouse]" in dumps[1]
