"""Exception hierarchy for mclines.

Degeneracies that a caller can reasonably branch on are raised as typed
exceptions; soft degeneracies (double roots, indeterminate directions) are
returned as result variants instead, not raised.
"""


class MclinesError(Exception):
    """Base class for all mclines errors."""


class InvalidParameters(MclinesError):
    """Surface or operation parameters violate their ordering/positivity rules."""


class DegenerateJet(MclinesError):
    """EG - F^2 <= 0 at an evaluation point: non-immersion or broken evaluators."""


class MinimalPoint(MclinesError):
    """Mean curvature vanishes with K < 0: the harmonic mean is undefined."""


class HarmonicUndefined(MclinesError):
    """Harmonic-mean line equation requested at a point with H ~ 0."""


class MuUndefined(MclinesError):
    """Chosen mean function is not finite/real at this point."""


class UmbilicPoint(MclinesError):
    """Operation requires distinct principal curvatures."""


class AmbiguousBranch(MclinesError):
    """Geodesic torsion too close to zero to label a foliation branch."""


class BadSeed(MclinesError):
    """Trace seed is umbilic, parabolic or outside the chart domain."""


class TangentialContact(MclinesError):
    """Folded continuation refused at an isolated tangential singularity."""


class NotUmbilic(MclinesError):
    """Normal-form extraction requested at a non-umbilic point."""


class DegenerateCubic(MclinesError):
    """Cubic jet vanishes at the umbilic: no normal form to classify."""


class UmbilicParabolic(MclinesError):
    """Both principal curvatures vanish: no well-defined kernel direction."""


class SingularParabolicPoint(MclinesError):
    """Gradient of K below threshold on the K = 0 set: level curve not regular."""


class TorsionVanishes(MclinesError):
    """Geodesic torsion dropped below threshold along a transition arc."""


class NoReturn(MclinesError):
    """Poincare map: max arc length exceeded before the section was reached."""


class LeftDomain(MclinesError):
    """Poincare map: the orbit left the chart domain before returning."""


class TooFewTransits(MclinesError):
    """Rotation-number estimate needs at least two recorded transits."""
