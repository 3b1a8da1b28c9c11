class WitnessError(Exception):
    """Base error; carries the process exit code the CLI reports it with."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidInputError(WitnessError):
    """Rejected state, parameter or configuration."""

    exit_code = 2


class SolverError(WitnessError):
    """The linear program did not converge."""

    exit_code = 3

    def __init__(self, detail: str, status: int | None = None, message: str = ""):
        if status is not None:
            detail = f"{detail} (solver status {status}: {message})"
        super().__init__(detail)
        self.status = status
        self.message = message
