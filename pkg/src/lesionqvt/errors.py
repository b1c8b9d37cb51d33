"""Exception hierarchy shared by every stage of the pipeline."""


class LesionQvtError(ValueError):
    """Base class; callers that isolate per-lesion failures catch this."""


# volume io
class MissingHeaderField(LesionQvtError):
    pass


class DimsMismatch(LesionQvtError):
    pass


class UnsupportedElementType(LesionQvtError):
    pass


class IoFailure(LesionQvtError, OSError):
    pass


class NonPositiveTarget(LesionQvtError):
    pass


class GeometryMismatch(LesionQvtError):
    pass


# roi ops
class EmptyMask(LesionQvtError):
    pass


class NegativeMargin(LesionQvtError):
    pass


class EmptyLesion(LesionQvtError):
    pass


class NoFollowups(LesionQvtError):
    pass


class ZeroBaselineDiameter(LesionQvtError):
    pass


# features
class EmptyRoi(LesionQvtError):
    pass


class NonPositiveBinWidth(LesionQvtError):
    pass


class DegenerateGeometry(LesionQvtError):
    pass


class UnknownKind(LesionQvtError):
    pass


# vessels
class NoLungFound(LesionQvtError):
    pass


class EmptyLung(LesionQvtError):
    pass


class ZeroChord(LesionQvtError):
    pass


# ml
class SingleClassDataset(LesionQvtError):
    pass


class SingleClassLabels(LesionQvtError):
    pass


class WidthMismatch(LesionQvtError):
    pass


class FoldClassCollapse(LesionQvtError):
    pass


class CorruptModelFile(LesionQvtError):
    pass


class VersionMismatch(LesionQvtError):
    pass


# pipeline / phantoms
class MissingTimepoint(LesionQvtError):
    pass


class EmptyMaskAfterResample(LesionQvtError):
    pass


class TooSmall(LesionQvtError):
    pass


class SelfIntersection(LesionQvtError):
    pass
