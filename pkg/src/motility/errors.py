"""Exception hierarchy for the motility pipeline.

Exit-code mapping used by the CLI: usage errors -> 1, data errors -> 2,
numeric failures -> 3.
"""


class MotilityError(Exception):
    """Base class for all pipeline errors."""


class DataError(MotilityError):
    """Problems with input data (manifests, frames, shapes of stored files)."""


class NumericError(MotilityError):
    """Numeric failures during model fitting or training."""


# --- dataio ---

class MissingColumn(DataError):
    def __init__(self, column):
        super().__init__(f"manifest is missing required column '{column}'")
        self.column = column


class BadNumeric(DataError):
    def __init__(self, row, col, value):
        super().__init__(f"manifest row {row}, column '{col}': cannot parse {value!r}")
        self.row = row
        self.col = col
        self.value = value


class TargetSumOutOfRange(DataError):
    def __init__(self, participant_id, total):
        super().__init__(
            f"participant '{participant_id}': motility targets sum to {total:.3f}, "
            f"outside the accepted [90, 110] band"
        )
        self.participant_id = participant_id
        self.total = total


class UnreadableFrame(DataError):
    def __init__(self, index, reason=""):
        msg = f"frame {index} could not be read"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.index = index


class InconsistentDimensions(DataError):
    def __init__(self, index, expected, got):
        super().__init__(
            f"frame {index} has dimensions {got}, expected {expected}"
        )
        self.index = index
        self.expected = expected
        self.got = got


class VideoTooShort(DataError):
    def __init__(self, frame_count, length):
        super().__init__(
            f"video has {frame_count} frames, need at least {length} for one window"
        )
        self.frame_count = frame_count
        self.length = length


# --- imgproc / tensors ---

class WrongChannelCount(DataError):
    def __init__(self, expected, got):
        super().__init__(f"expected {expected} channel(s), got {got}")
        self.expected = expected
        self.got = got


class FrameTooSmall(DataError):
    def __init__(self, shape, minimum):
        super().__init__(f"frame of shape {shape} is below the minimum size {minimum}")
        self.shape = shape
        self.minimum = minimum


class ShapeMismatch(DataError):
    def __init__(self, message):
        super().__init__(message)


# --- represent ---

class StrideOutOfRange(DataError):
    def __init__(self, start, stride, frame_count):
        super().__init__(
            f"dense-flow pair (start={start}, stride={stride}) exceeds frame count {frame_count}"
        )


class MissingConcentration(DataError):
    def __init__(self, participant_id):
        super().__init__(
            f"participant '{participant_id}' has no concentration value but the "
            f"concentration toggle is on"
        )
        self.participant_id = participant_id


# --- classical / neural ---

class EmptyDataset(DataError):
    def __init__(self):
        super().__init__("dataset has no rows")


class NotConverged(Warning):
    """Coordinate descent hit max_iter before the tolerance; best iterate kept."""


class NonFiniteGradient(NumericError):
    def __init__(self, name=""):
        super().__init__(f"non-finite gradient encountered{': ' + name if name else ''}")


class NonFiniteLoss(NumericError):
    def __init__(self, epoch, loss):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


class SpecShapeError(DataError):
    def __init__(self, message):
        super().__init__(message)


# --- eval ---

class TooFewParticipants(DataError):
    def __init__(self, n, k):
        super().__init__(f"{n} participants cannot be split into {k} folds")


class ZeroVariance(MotilityError):
    """Score differences have zero variance; the t statistic degenerates."""


class FoldPlanMismatch(DataError):
    def __init__(self):
        super().__init__("the two reports were produced with different fold plans")


class UnknownId(DataError):
    def __init__(self, participant_id):
        super().__init__(f"unknown participant id '{participant_id}'")


# --- cli / checkpoints ---

class UnreadableCheckpoint(DataError):
    def __init__(self, path, reason=""):
        msg = f"cannot read checkpoint {path}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
