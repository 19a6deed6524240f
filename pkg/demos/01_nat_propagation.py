"""Two contexts exchanging natural numbers.

c1 knows nat(0).  c2 imports every nat-fact of c1 and closes it under
successor.  One round is enough for c2; the depth bound keeps its belief
set finite and marks it truncated.  The even/odd variant never settles.
"""
from importlib.resources import files

from mcsim import grounded_equilibrium, load_system
from mcsim.system import iterate_data_states


def corpus(name):
    return (files("mcsim") / "corpus" / name).read_text(encoding="utf-8")


def show(state):
    for name in sorted(state.beliefs):
        b = state.beliefs[name]
        print(f"  {name}: {{{', '.join(map(str, b.sorted()))}}}{' (truncated)' if b.truncated else ''}")


def main():
    nat = load_system(corpus("nat.mcx"))
    print("nat system, grade 1:")
    res = grounded_equilibrium(nat, 1)
    show(res.state)
    print(f"  steps={res.steps} fixpoint={res.reached_fixpoint}")

    print("\neven/odd system, first five rounds:")
    evenodd = load_system(corpus("evenodd.mcx"))
    for k, state in zip(range(6), iterate_data_states(evenodd)):
        print(f" round {k}")
        show(state)

    res = grounded_equilibrium(evenodd, None)
    print(f"\nunbounded request stops at the cap: steps={res.steps} fixpoint={res.reached_fixpoint}")


if __name__ == "__main__":
    main()
