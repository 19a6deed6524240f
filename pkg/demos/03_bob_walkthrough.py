"""Bob's monitoring agent, run tick by tick.

Chest pain at tick 1 makes the call_physician pattern produce a rule aimed
at the cardiologist.  At tick 3 the symptom is confirmed while no doctor is
available, which triggers the emergency rule; its remote literal takes one
tick, so help_asked lands at tick 4.  Eczema at tick 5 sends a directory
query for a dermatologist, ranked by Bob's preferences.
"""
import sys
from importlib.resources import files

from mcsim import RandomDelay, load_system, parse_scenario, run_scenario, theorem_violations

KINDS = {"instance", "trigger", "preground", "launch", "complete", "fail", "apply", "deferred"}


def main(seed=0):
    corpus = files("mcsim") / "corpus"
    sys_ = load_system((corpus / "bob.mcx").read_text(encoding="utf-8"))
    script = parse_scenario((corpus / "bob.mcxs").read_text(encoding="utf-8")).to_scenario()

    res = run_scenario(sys_, script, seed=seed)
    for ev in res.events:
        if ev.kind in KINDS:
            print(ev.line())

    print("\nrun-time versions:")
    for rv in res.versions:
        print(f"  {rv.exec_id} {rv.rule_id}: {rv}")
    print(f"\nviolations of the completion check: {theorem_violations(res) or 'none'}")

    slow = run_scenario(sys_, script, RandomDelay(0, 3, seed), seed=seed)
    done = [v.completed for v in slow.versions if v.rule_id == "help" and v.successful]
    print(f"with random delays of 0-3 ticks the emergency rule completes at {done}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
