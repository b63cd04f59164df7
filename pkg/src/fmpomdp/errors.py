"""Exceptions shared across the package."""


class BudgetExceeded(RuntimeError):
    def __init__(self, estimated_count: int, budget: int):
        super().__init__(f"enumeration needs ~{estimated_count} paths, budget is {budget}")
        self.estimated_count = estimated_count
        self.budget = budget


class Unreachable(ValueError):
    def __init__(self, s1: int, s2: int):
        super().__init__(f"state {s2} is unreachable from state {s1}")
        self.s1 = s1
        self.s2 = s2


class NotDecodable(ValueError):
    def __init__(self, verdict):
        super().__init__(f"windows are not decodable: {verdict.witness}")
        self.verdict = verdict


class AssumptionViolated(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class OutOfRange(IndexError):
    pass


class DomainMismatch(ValueError):
    pass
