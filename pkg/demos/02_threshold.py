"""The even/odd exchange with a counter.

Each context keeps count(C) and threshold(2) in its knowledge base.  The
threshold_new management function adds a numeral only when it is new and
bumps the counter, and refuses once the counter reaches the threshold, so
the iteration reaches a fixpoint after a few rounds.
"""
from importlib.resources import files

from mcsim import grounded_equilibrium, is_equilibrium, load_system
from mcsim.system import iterate_data_states


def main():
    sys_ = load_system((files("mcsim") / "corpus" / "threshold.mcx").read_text(encoding="utf-8"))
    for k, state in zip(range(6), iterate_data_states(sys_)):
        line = "; ".join(f"{n}: {', '.join(map(str, state.beliefs[n].sorted()))}" for n in sorted(state.beliefs))
        print(f"round {k}: {line}")

    res = grounded_equilibrium(sys_, None)
    print(f"\nfixpoint={res.reached_fixpoint} after {res.steps} rounds, "
          f"equilibrium={is_equilibrium(res.state)}")


if __name__ == "__main__":
    main()
