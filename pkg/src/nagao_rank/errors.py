"""Exception types raised across the package."""


class NagaoError(Exception):
    """Base class for all errors raised by nagao_rank."""


class BadPrime(NagaoError, ValueError):
    pass


class MalformedConfig(NagaoError, ValueError):
    pass


class DegenerateFamily(NagaoError, ValueError):
    pass


class SingularFiber(NagaoError, ValueError):
    pass


class ParityViolation(NagaoError, ArithmeticError):
    """t1^2 - t2 came out odd; the point counts are inconsistent."""


class OutOfOrderPrime(NagaoError, ValueError):
    pass


class InsufficientData(NagaoError, ValueError):
    pass


class HypothesisNotAsserted(NagaoError):
    pass


class InconsistentLedger(NagaoError, ValueError):
    pass


class OverDetermined(NagaoError, ValueError):
    pass


class MismatchBug(NagaoError, AssertionError):
    """Two independent counts of the same point set disagree."""


class CorruptArtifact(NagaoError, ValueError):
    pass
