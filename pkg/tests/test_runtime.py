import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsim import (ConstantDelay, OpStatement, RandomDelay, Scenario, TableDelay, TickEntry, action,
                   applicable_heads, execute_rule, initial_state, load_system, parse_scenario,
                   run_scenario, theorem_violations)
from mcsim.system import SYSTEM, pregrounded_rules

import generators
from conftest import A

CARDIO = """
context asker {
  bridge { find_cardiologist: add(find_cardiologist(N)) <- med-dir:cardiologist(N); }
}
context med-dir { kb { cardiologist(maggie-smith). } }
"""


def test_cardiologist_lookup_takes_one_hop():
    state = initial_state(load_system(CARDIO))
    rv = execute_rule(state, "asker", "find_cardiologist", ConstantDelay(1))
    assert rv.successful
    assert str(rv.head) == "find_cardiologist(maggie-smith)"
    assert rv.timestamps == [rv.start + 1, rv.start + 1]
    assert str(rv) == ("find_cardiologist(maggie-smith)[1] <- "
                       "med-dir:cardiologist(maggie-smith)[1]")


def test_negative_literal_failure():
    sys_ = load_system("context o { bridge { r: add(h) <- c:a, not c:b; } } context c { kb { a. b. } }")
    rv = execute_rule(initial_state(sys_), "o", "r")
    assert not rv.successful and rv.failed_at == 1 and rv.reason == "negation"
    assert str(rv).startswith("h[failed:1:negation] <- c:a[1], not c:b[2]!negation")


def test_nonground_negative_fails():
    sys_ = load_system("context o { bridge { r: add(h) <- c:a, not c:p(X); } } context c { kb { a. } }")
    rv = execute_rule(initial_state(sys_), "o", "r")
    assert rv.reason == "nonground-negative"


def test_timeout_beyond_max_latency():
    sys_ = load_system(CARDIO)
    rv = execute_rule(initial_state(sys_), "asker", "find_cardiologist", TableDelay({"med-dir": 100}))
    assert not rv.successful and rv.reason == "timeout"
    assert rv.records[0].tick == sys_.config.max_latency


def test_unreachable_source_fails():
    sys_ = load_system(CARDIO + "reach { med-dir -> asker; }")
    rv = execute_rule(initial_state(sys_), "asker", "find_cardiologist")
    assert rv.reason == "unreachable"


LEASE = """
context o { bridge { r: add(h(X)) <- c:p(X), c:SECOND(X); } }
context c { kb { p(1). r(1). q(X) <- p(X). } }
"""


def _lease_run(second, persistence):
    # untriggered rules launch at tick 0; p(1) resolves at 1 and is retracted at 2
    sys_ = load_system(LEASE.replace("SECOND", second))
    script = Scenario([TickEntry(0), TickEntry(2, {"c": [action("retract", A("p(1)"))]})])
    return run_scenario(sys_, script, ConstantDelay(1), persistence=persistence)


def test_lease_keeps_literal_true_until_completion():
    on = _lease_run("q", True)
    (rv,) = on.versions
    assert rv.successful and str(rv.head) == "h(1)" and rv.timestamps == [1, 2, 2]
    lines = on.log_lines()
    deferred = lines.index("tick=2 event=deferred ctx=c detail=retract(p(1))")
    assert lines.index("tick=2 event=update ctx=c detail=retract(p(1))") > deferred
    assert A("p(1)") not in on.state.beliefs["c"]
    assert theorem_violations(on) == []


def test_without_lease_later_literal_fails():
    off = _lease_run("q", False)
    (rv,) = off.versions
    assert not rv.successful and rv.reason == "no-answer" and rv.failed_at == 1


def test_without_lease_success_can_diverge():
    off = _lease_run("r", False)
    (rv,) = off.versions
    assert rv.successful
    assert any(e.kind == "divergence" for e in off.events)
    assert not any(e.kind == "divergence" for e in _lease_run("r", True).events)


def test_lease_blocks_directory_leave():
    sys_ = load_system(LEASE.replace("SECOND", "q"))
    script = Scenario([TickEntry(0),
                       TickEntry(2, {SYSTEM: [action("dir_leave", A("c"))]})])
    res = run_scenario(sys_, script, ConstantDelay(1))
    lines = res.log_lines()
    assert "tick=2 event=deferred ctx=@system detail=dir_leave(c)" in lines
    assert lines.index("tick=2 event=directory ctx=@system detail=dir_leave(c)") > \
        lines.index("tick=2 event=release ctx=o detail=e1 2")


RACE = """
context o {
  bridge {
    slow: add(done(slow)) <- c1:ready;
    fast: add(done(fast)) <- c2:ready;
  }
}
context c1 { kb { ready. } }
context c2 { kb { ready. } }
"""


def test_race_completion_follows_latency():
    sys_ = load_system(RACE)
    script = Scenario([TickEntry(0)])
    res = run_scenario(sys_, script, TableDelay({"c1": 3, "c2": 1}))
    done = [(v.rule_id, v.completed) for v in res.versions]
    assert done == [("fast", 1), ("slow", 3)]


def test_empty_script_gives_initial_state_and_no_log(system_of):
    sys_ = system_of("nat.mcx")
    res = run_scenario(sys_, Scenario())
    assert res.events == [] and res.versions == []
    assert res.state.beliefs == initial_state(sys_).beliefs


def test_directory_fallback_to_next_candidate():
    sys_ = load_system("""
context o {
  bridge { pick: add(got(X)) <- helper@Dir:offer(X); }
  prefs { fast }
}
context h1 { kb { offer(one). } }
context h2 { }
dir { helper: h1, h2; attrs h2: fast; }
""")
    res = run_scenario(sys_, Scenario([TickEntry(0)]), ConstantDelay(1))
    lines = res.log_lines()
    assert "tick=0 event=preground ctx=o detail=pick [h2,h1]" in lines
    assert any("event=fallback" in l for l in lines)
    assert [v.status for v in res.versions] == ["failed", "successful"]
    assert A("got(one)") in res.state.beliefs["o"]


def test_unknown_script_references_rejected(system_of):
    sys_ = system_of("nat.mcx")
    with pytest.raises(ValueError):
        run_scenario(sys_, Scenario([TickEntry(1, execs=[("c2", "nope")])]))
    with pytest.raises(ValueError):
        run_scenario(sys_, Scenario([TickEntry(1, {"ghost": []})]))
    with pytest.raises(ValueError):
        run_scenario(sys_, Scenario([TickEntry(2), TickEntry(1)]))


def test_sync_mode_logs_beliefs_and_equilibrium(system_of, corpus):
    sys_ = system_of("bob.mcx")
    script = parse_scenario(corpus("bob.mcxs")).to_scenario()
    res = run_scenario(sys_, script, mode="sync")
    kinds = {e.kind for e in res.events}
    assert {"beliefs", "equilibrium"} <= kinds
    eq = [e.tick for e in res.events if e.kind == "equilibrium" and e.detail == "true"]
    assert eq == [1, 4, 6]
    with pytest.raises(ValueError):
        run_scenario(sys_, Scenario([TickEntry(0)]), mode="sync")


def test_bob_scenario_satisfies_theorem(system_of, corpus):
    script = parse_scenario(corpus("bob.mcxs")).to_scenario()
    res = run_scenario(system_of("bob.mcx"), script)
    assert theorem_violations(res) == []
    assert A("help_asked(bob,[chestpain],3,3,15,ambulance)") in res.state.beliefs["pma_bob"]


def test_replay_is_identical(system_of, corpus):
    script = parse_scenario(corpus("bob.mcxs")).to_scenario()
    runs = [run_scenario(system_of("bob.mcx"), script, RandomDelay(0, 3, 11), seed=5) for _ in range(2)]
    assert runs[0].log_lines() == runs[1].log_lines()
    assert [str(v) for v in runs[0].versions] == [str(v) for v in runs[1].versions]


def _independent_description(rng):
    """Rules whose positive literals share no variables and whose negatives are ground."""
    desc = generators.random_description(rng, negation=False, kb_rules=False)
    names = sorted(desc)
    for n, c in desc.items():
        bridge = []
        for i, _ in enumerate(c["bridge"]):
            body = []
            for j in range(rng.randint(1, 3)):
                v = f"V{j}"
                src = rng.choice(names + [None])
                body.append((None if src == n else src, (rng.choice(generators.PREDS), v), False))
            if rng.random() < 0.5:
                src = rng.choice(names + [None])
                body.append((None if src == n else src, generators.ground_atom(rng), True))
            bridge.append(((rng.choice(generators.PREDS), "V0"), body))
        c["bridge"] = bridge
    return desc


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_quiet_execution_matches_synchronous_check(seed):
    rng = random.Random(seed)
    desc = _independent_description(rng)
    sys_ = generators.build(desc)
    state = initial_state(sys_)
    rules = pregrounded_rules(state)
    for n in sorted(desc):
        for r in rules[n]:
            rv = execute_rule(state, n, r.id, RandomDelay(0, 2, seed))
            heads = applicable_heads({n: [r]}, state.beliefs)[n]
            assert rv.successful == bool(heads)
            if rv.successful:
                assert OpStatement("add", rv.head) in heads
