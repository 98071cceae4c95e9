"""Exception hierarchy shared by all curveflow modules."""


class CurveflowError(Exception):
    """Base class for every error raised by the package."""


# geometry
class DegenerateCurve(CurveflowError, ValueError):
    """The parametrization speed drops below the regularity threshold."""


class InvalidAngle(CurveflowError, ValueError):
    """A contact angle outside the open interval (0, pi)."""


class AngleMismatch(CurveflowError, ValueError):
    """Endpoint tangents do not match the prescribed contact angle."""


class EndpointsOffAxis(CurveflowError, ValueError):
    """An endpoint does not lie on the x-axis."""


# flow
class IncompatibleInitialCurve(CurveflowError, ValueError):
    """Initial curve violates a boundary condition of the flow."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        msg = condition if not detail else f"{condition}: {detail}"
        super().__init__(msg)


class StepFailure(CurveflowError, RuntimeError):
    """The step size collapsed below ``dt_min``.

    Reported by the run loop as a candidate blow-up.
    """

    def __init__(self, t: float, dt: float, msg: str = ""):
        self.t = t
        self.dt = dt
        super().__init__(msg or f"step size {dt:.3e} fell below dt_min at t={t:.6e}")


class LinearSolveFailure(CurveflowError, RuntimeError):
    """The implicit linear system could not be solved."""


# smoother / norms
class InsufficientSamples(CurveflowError, ValueError):
    """Not enough samples for the requested estimate."""


class InvalidSpec(CurveflowError, ValueError):
    """Norm parameters outside their admissible range."""


# chart
class OutOfTube(CurveflowError, ValueError):
    """A normal coordinate outside the tube of half-width ``d``."""


class OutsideTube(CurveflowError, ValueError):
    """A curve leaves the image of the curvilinear chart."""


class NonMonotone(CurveflowError, ValueError):
    """The reparametrization found by height extraction is not increasing."""

    def __init__(self, sigma: float, msg: str = ""):
        self.sigma = sigma
        super().__init__(msg or f"reparametrization not increasing near sigma={sigma:.6f}")


class NewtonDivergence(CurveflowError, RuntimeError):
    """Damped Newton iteration failed to converge."""


class InvalidChart(CurveflowError, ValueError):
    """A reference curve violating the chart's boundary requirements."""


# lab
class NoAdmissibleEpsilon(CurveflowError, RuntimeError):
    """No smoothing time in the scan produced an admissible reference curve."""


class IoFailure(CurveflowError, OSError):
    """Writing or reading an output file failed."""


class ConfigError(CurveflowError, ValueError):
    """Malformed configuration or manifest."""
