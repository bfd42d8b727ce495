"""Exception hierarchy shared by all modules."""


class CharFuncError(ValueError):
    """Base class for every error raised by :mod:`charfunc`."""


class NotHermitian(CharFuncError):
    pass


class NotPsd(CharFuncError):
    pass


class NotUnitary(CharFuncError):
    pass


class NotAContraction(CharFuncError):
    pass


class SingularCore(CharFuncError):
    """The small core matrix of a low-rank update is numerically singular."""


class SingularResolvent(CharFuncError):
    pass


class SingularBracket(CharFuncError):
    """``I - (Gamma - I) F1(z)`` could not be inverted.

    This cannot happen inside the unit disc, so seeing it means the inputs
    are inconsistent (for example a measure whose total mass is not ``I``).
    """


class GammaNotStrict(CharFuncError):
    pass


class RadiusTooLarge(CharFuncError):
    pass


class PoleHit(CharFuncError):
    pass


class SpectralRadiusTooClose(CharFuncError):
    pass


class BadShape(CharFuncError):
    pass


class ModelSpecError(CharFuncError):
    """Malformed or inconsistent model specification file."""
