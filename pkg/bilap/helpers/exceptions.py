class BilapBaseException(Exception):
    pass


class ConfigError(BilapBaseException):
    def __init__(self, field: str, msg: str):
        self.field = field
        super().__init__(f"{field}: {msg}")


class DomainError(BilapBaseException, ValueError):
    pass


class GeneratorError(DomainError):
    pass


class NoRoot(BilapBaseException):
    pass


class NumericalError(BilapBaseException):
    pass


class NonFiniteSample(NumericalError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"integrand is not finite at grid sample #{index}")


class NotConverged(NumericalError):
    def __init__(self, msg: str, estimate=None):
        self.estimate = estimate
        super().__init__(msg)


class NoConvergence(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class OrderDetectionAmbiguous(NumericalError):
    pass


class MissingIngredient(NumericalError):
    pass


class SizeExceeded(NumericalError):
    pass


class InsufficientData(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass


class UnsupportedGenerator(NumericalError):
    pass


class CheckFailed(BilapBaseException):
    pass


class DivergenceMismatch(CheckFailed):
    pass
