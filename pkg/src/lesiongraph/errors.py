"""Exception hierarchy shared by every pipeline stage."""


class LesionGraphError(Exception):
    """Base class for all errors raised by :mod:`lesiongraph`."""


class CorpusError(LesionGraphError, ValueError):
    """Malformed corpus: missing image, bad label token, duplicate id."""


class FoldError(LesionGraphError, ValueError):
    pass


class SegmentationError(LesionGraphError, ValueError):
    pass


class DegenerateGraphError(LesionGraphError, ValueError):
    """Raised when nodal signals cannot support a weighting scheme."""


class ConvergenceError(LesionGraphError, ArithmeticError):
    pass


class NotFittedError(LesionGraphError, RuntimeError):
    pass


class ConfigError(LesionGraphError, ValueError):
    pass


class StageError(LesionGraphError):
    """A pipeline stage failed for a specific image."""

    def __init__(self, stage, image_id, cause):
        self.stage = stage
        self.image_id = image_id
        self.cause = cause
        super().__init__(f"stage {stage!r} failed on image {image_id!r}: {cause}")
