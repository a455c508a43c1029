class Heuristic:
    """Number of goal atoms that do not hold."""

    def __init__(self, task):
        self.goal = task.goal

    def __call__(self, state):
        return len(self.goal - state)
