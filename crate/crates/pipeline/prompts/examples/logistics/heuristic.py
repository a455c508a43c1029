def parse(text):
    return tuple(text[1:-1].split())


class Heuristic:
    """Each misplaced package visits every location on its route once.

    A package in the wrong city costs truck legs to and from the airports
    plus a flight; each leg is a load, a move and an unload.
    """

    def __init__(self, task):
        self.atoms = [parse(a) for a in task.atoms]
        self.city = {}
        self.airports = set()
        for i in task.statics:
            a = self.atoms[i]
            if a[0] == "in-city":
                self.city[a[1]] = a[2]
        for act in task.actions:
            name = parse(act.name)
            if name[0] == "fly-airplane":
                self.airports.add(name[2])
                self.airports.add(name[3])
        self.target = {}
        for g in task.goal:
            pred, *args = self.atoms[g]
            if pred == "at":
                self.target[args[0]] = args[1]

    def __call__(self, state):
        at = {}
        inside = {}
        for i in state:
            a = self.atoms[i]
            if a[0] == "at":
                at[a[1]] = a[2]
            elif a[0] == "in":
                inside[a[1]] = a[2]

        h = 0
        for pkg, goal in self.target.items():
            if at.get(pkg) == goal:
                continue
            loc = at.get(pkg)
            if loc is None:
                # loaded: count from the vehicle's position, minus the load
                loc = at.get(inside.get(pkg))
                h -= 1
            if loc is None:
                continue
            if self.city.get(loc) == self.city.get(goal):
                h += 3
                continue
            if loc not in self.airports:
                h += 3
            h += 3
            if goal not in self.airports:
                h += 3
        return h
