"""Exception hierarchy shared across the package."""


class C3BFError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGeometryError(C3BFError, ValueError):
    pass


class PenetrationError(C3BFError):
    """The ego center lies inside (or on) an obstacle's bounding circle.

    The collision cone is undefined there, so the barrier value cannot be
    evaluated. The scenario engine treats this as a safety violation.
    """

    def __init__(self, distance, radius):
        self.distance = float(distance)
        self.radius = float(radius)
        super().__init__(
            f"ego inside obstacle circle: |p_rel|={self.distance:.6g} <= r={self.radius:.6g}"
        )


class DegenerateVelocityError(C3BFError):
    """Relative velocity is (numerically) zero; the cone direction is undefined."""

    def __init__(self, speed):
        self.speed = float(speed)
        super().__init__(f"degenerate relative velocity |v_rel|={self.speed:.3g}")


class InvalidConstraintError(C3BFError, ValueError):
    pass


class SafetyInfeasibleError(C3BFError):
    """No input satisfies every barrier constraint and the input bounds."""

    def __init__(self, message, constraint_index=None, violation=None):
        self.constraint_index = constraint_index
        self.violation = violation
        super().__init__(message)


class ConfigError(C3BFError, ValueError):
    pass
