import heapq


class Heuristic:
    """Additive delete-relaxation heuristic.

    Cost of an atom is the cheapest way to reach it ignoring deletes, where
    an action costs one plus the sum of its precondition costs.
    """

    def __init__(self, task):
        self.goal = task.goal
        self.actions = task.actions
        self.needs = [[] for _ in task.atoms]
        for k, act in enumerate(task.actions):
            for p in act.pre:
                self.needs[p].append(k)

    def __call__(self, state):
        cost = {a: 0 for a in state}
        missing = [len(act.pre) for act in self.actions]
        total = [0] * len(self.actions)
        queue = [(0, a) for a in state]
        heapq.heapify(queue)
        pending = [k for k, act in enumerate(self.actions) if not act.pre]
        self._fire(pending, total, cost, queue)
        done = set()
        while queue:
            c, atom = heapq.heappop(queue)
            if atom in done or cost.get(atom) != c:
                continue
            done.add(atom)
            ready = []
            for k in self.needs[atom]:
                missing[k] -= 1
                total[k] += c
                if missing[k] == 0:
                    ready.append(k)
            self._fire(ready, total, cost, queue)
        h = 0
        for g in self.goal:
            if g not in cost:
                return float("inf")
            h += cost[g]
        return h

    def _fire(self, ready, total, cost, queue):
        for k in ready:
            c = total[k] + 1
            for a in self.actions[k].add:
                if c < cost.get(a, float("inf")):
                    cost[a] = c
                    heapq.heappush(queue, (c, a))
