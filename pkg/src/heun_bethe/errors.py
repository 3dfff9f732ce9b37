"""Exception hierarchy shared by all modules."""


class HeunError(Exception):
    """Base class; ``code`` is used for the structured CLI error object."""

    code = "HeunError"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"type": type(self).__name__, "message": str(self)}
        out.update({k: _plain(v) for k, v in self.details.items()})
        return out


def _plain(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


class NonConvergent(HeunError):
    pass


class PoleAt(HeunError):
    pass


class NoConvergence(HeunError):
    pass


class DomainError(HeunError):
    pass


class DegenerateLattice(HeunError):
    pass


class IllConditioned(HeunError):
    pass


class AmbiguousNullspace(HeunError):
    pass


class InterpolationInconsistent(HeunError):
    pass


class SpectralDegenerate(HeunError):
    pass


class InconsistentState(HeunError):
    pass


class MaxIterations(HeunError):
    pass


class SingularJacobian(HeunError):
    pass


class PathLost(HeunError):
    pass


class DenominatorZero(HeunError):
    pass


class RootCollision(HeunError):
    pass


class ResidualTooLarge(HeunError):
    pass


class NotProportional(HeunError):
    pass


class CutoffTooSmall(HeunError):
    pass
