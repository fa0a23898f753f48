"""Exception types shared across the toolkit."""


class HandcalError(Exception):
    pass


class DegenerateRot6d(HandcalError):
    """6D rotation input whose Gram-Schmidt step is ill-conditioned."""


class NotARotation(HandcalError):
    """Matrix fails the orthonormality / determinant checks."""


class SchemaError(HandcalError):
    """File does not match the documented JSON schema."""


class InvariantError(HandcalError):
    """File is schema-valid but violates a model invariant."""


class BehindCamera(HandcalError):
    def __init__(self, index):
        super().__init__(f"point {index} is behind the camera")
        self.index = index


class TooFewKeypoints(HandcalError):
    pass


class DimensionMismatch(HandcalError):
    pass


class NonPositiveTemperature(HandcalError):
    pass


class InfeasibleStart(HandcalError):
    pass


class DegenerateFace(HandcalError):
    def __init__(self, face_index):
        super().__init__(f"face {face_index} has zero area")
        self.face_index = face_index
