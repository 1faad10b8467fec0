"""Exception types shared by the library and the command line."""


class ContextMismatch(ValueError):
    """Two series (or fields) live in different contexts."""


class NotADiffeo(ValueError):
    """A coordinate tuple fails the formal inverse function criterion."""


class NonEvaluative(ValueError):
    """A formal isotopy cannot be evaluated at a nonzero time."""


class LinearizationError(Exception):
    pass


class NotAdmissible(LinearizationError):
    """The field has a term ``x^alpha d/dx^i`` with ``<w, alpha> < w_i``."""

    def __init__(self, axis, alpha, message=None):
        self.axis = axis
        self.alpha = tuple(alpha)
        super().__init__(
            message
            or f"not admissible: term x^{self.alpha} d/dx{axis + 1} has negative weighted degree"
        )


class SingularAdjoint(LinearizationError):
    """``ad_{X[0]}`` is not invertible on the graded slice of degree ``degree``."""

    def __init__(self, degree, kernel, message=None):
        self.degree = degree
        self.kernel = kernel
        super().__init__(
            message
            or f"adjoint operator is singular on the degree-{degree} slice "
            f"(kernel dimension {len(kernel)})"
        )


class OrderBoundViolation(ArithmeticError):
    """A flow coefficient breaks ``Theta_w(phi_k^i) >= w_i + k``."""
