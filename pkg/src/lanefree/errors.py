"""Exception types shared across the package."""


class IntegrityError(RuntimeError):
    """A fleet state left the admissible state space, or a computation was
    asked to evaluate outside it (e.g. a pair separation at or below the
    safety distance).  Carries enough context to name the offending
    constraint and vehicles."""

    def __init__(self, constraint: str, i: int | None = None, j: int | None = None,
                 detail: str = ""):
        self.constraint = constraint
        self.i = i
        self.j = j
        who = ""
        if i is not None and j is not None and i != j:
            who = f" (vehicles {i}, {j})"
        elif i is not None:
            who = f" (vehicle {i})"
        msg = f"state-space integrity violation: {constraint}{who}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class InfeasibleScenarioError(RuntimeError):
    """Rejection sampling could not place the requested fleet."""


class ConfigError(ValueError):
    """Invalid configuration file, key, or value."""
