"""Asking whether a belief holds at some or every equilibrium time point.

The decision procedure replays the update sequence synchronously and tabulates,
per tick, whether the state is an equilibrium and whether the queried context
believes the atom.
"""
from importlib.resources import files

from mcsim import QuerySpec, action, decide_query, load_system, parse_atom, parse_scenario


def main():
    corpus = files("mcsim") / "corpus"
    sys_ = load_system((corpus / "bob.mcx").read_text(encoding="utf-8"))
    sc = parse_scenario((corpus / "bob.mcxs").read_text(encoding="utf-8")).to_scenario()
    horizon = 8
    actions = [(sc.at(t).actions if sc.at(t) else {}) for t in range(1, horizon + 1)]

    target = parse_atom("help_asked(bob,[chestpain],3,3,15,ambulance)")
    for line in decide_query(sys_, QuerySpec("pma_bob", target, horizon, actions)).lines():
        print(line)

    print()
    small = load_system("context c { kb { p(a). } }")
    acts = [{}, {"c": [action("retract", parse_atom("p(a)"))]}, {}]
    res = decide_query(small, QuerySpec("c", parse_atom("p(a)"), 3, acts, "forall"))
    print(f"forall p(a): {res.answer}, first counterexample at t={res.witness}")


if __name__ == "__main__":
    main()
