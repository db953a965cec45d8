"""Exception types. Every error carries a short machine-readable ``code``."""


class WalklabError(Exception):
    def __init__(self, code, message=""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class GraphError(WalklabError):
    pass


class ChainError(WalklabError):
    pass


class SolverError(WalklabError):
    pass


class SimulationError(WalklabError):
    pass
