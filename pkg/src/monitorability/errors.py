"""Exception types shared across the package."""


class MonitorabilityError(Exception):
    """Base class for every error raised by this package."""


class ParseError(MonitorabilityError, ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownAction(MonitorabilityError, ValueError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"action {name!r} is not in the alphabet")


class UnboundVariable(MonitorabilityError, ValueError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"variable {name!r} is not bound by any fixpoint")


class OpenFormula(MonitorabilityError, ValueError):
    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__(f"formula has free variables: {', '.join(self.names)}")


class UnguardedFormula(MonitorabilityError, ValueError):
    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__(f"unguarded occurrences of: {', '.join(self.names)}")


class NotAFixpoint(MonitorabilityError, ValueError):
    pass


class NotInFragment(MonitorabilityError, ValueError):
    pass


class NotInformativeFragment(NotInFragment):
    pass


class NotRegular(MonitorabilityError, ValueError):
    pass


class ConflictingVerdicts(MonitorabilityError):
    """Raised when a single trace is both accepted and rejected."""

    def __init__(self, word):
        self.word = tuple(word)
        shown = ".".join(self.word) if self.word else "eps"
        super().__init__(f"trace {shown} reaches both yes and no")


class StateExplosion(MonitorabilityError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"state universe exceeded the cap of {limit}")
