from typing import Any, Mapping, Optional


class DepthHfrError(Exception):
    exit_code = 1


class InvalidInputError(DepthHfrError, ValueError):
    pass


class ShapeError(InvalidInputError):
    pass


class UnfillableError(InvalidInputError):
    pass


class DegenerateLandmarksError(InvalidInputError):
    pass


class UndefinedScoreError(InvalidInputError):
    pass


class DegenerateScoresError(InvalidInputError):
    pass


class AlignmentError(InvalidInputError):
    pass


class ContractError(DepthHfrError):
    pass


class ProtocolError(DepthHfrError):
    pass


class ConfigurationError(DepthHfrError):
    """A protocol channel needs a model that was not provided."""


class TrainingDivergedError(DepthHfrError):
    exit_code = 4

    def __init__(self, message: str, report: Optional[Mapping[str, Any]] = None):
        super().__init__(message)
        self.report = dict(report or {})

    def __str__(self) -> str:
        if not self.report:
            return super().__str__()
        details = ", ".join(f"{key}={value}" for key, value in self.report.items())
        return f"{super().__str__()} ({details})"


class DegenerateMappingError(TrainingDivergedError):
    pass


class ConfigError(DepthHfrError):
    exit_code = 2

    def __init__(self, errors: Any):
        self.errors = errors
        super().__init__(f"Invalid configuration: {errors}")


class DependencyError(DepthHfrError):
    exit_code = 3

    def __init__(self, stage: str, required: list):
        self.stage = stage
        self.required = list(required)
        super().__init__(
            f"Stage '{stage}' requires stage(s) completed under this config: "
            f"{', '.join(self.required)}"
        )
