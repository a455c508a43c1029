class Action:
    name: str             # "(pick ball1 rooma left)"
    pre: list[int]        # atom ids that must hold
    add: list[int]
    delete: list[int]


class Task:
    domain: str           # domain name
    problem: str          # problem name
    atoms: list[str]      # atom id -> text, sorted lexicographically
    actions: list[Action] # ground actions, sorted by name
    init: frozenset[int]
    goal: frozenset[int]
    statics: frozenset[int]  # atoms that no action adds or deletes


class Heuristic:
    def __init__(self, task: Task):
        """Called once per task before search starts."""

    def __call__(self, state: frozenset[int]) -> float:
        """Estimated remaining plan length.

        `state` holds the ids of the true atoms. Return 0 in goal states and
        float("inf") for dead ends.
        """
