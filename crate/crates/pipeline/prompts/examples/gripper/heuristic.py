import math


def parse(text):
    return tuple(text[1:-1].split())


class Heuristic:
    """Counts picks, drops and robot moves for the misplaced balls.

    Each trip carries as many balls as there are grippers; between trips
    the robot walks back.
    """

    def __init__(self, task):
        self.atoms = [parse(a) for a in task.atoms]
        self.target = {}
        for g in task.goal:
            pred, *args = self.atoms[g]
            if pred == "at":
                self.target[args[0]] = args[1]
        self.grippers = max(1, len({a[1] for a in self.atoms if a[0] == "free"}))

    def __call__(self, state):
        robby = None
        where = {}
        carried = set()
        for i in state:
            a = self.atoms[i]
            if a[0] == "at-robby":
                robby = a[1]
            elif a[0] == "at":
                where[a[1]] = a[2]
            elif a[0] == "carry":
                carried.add(a[1])

        h = 0
        waiting = {}
        holding_misplaced = False
        for ball, room in self.target.items():
            if where.get(ball) == room:
                continue
            if ball in carried:
                h += 1
                holding_misplaced = True
                if robby != room:
                    h += 1
            else:
                h += 2
                waiting.setdefault(where.get(ball), []).append(ball)

        for room, balls in waiting.items():
            trips = math.ceil(len(balls) / self.grippers)
            h += 2 * trips - 1
            if robby != room and not holding_misplaced:
                h += 1
        return h
