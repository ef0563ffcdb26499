"""
Error hierarchy shared by every stage of the forecasting pipeline.

Each error carries the process exit code the command line reports for it:
2 for I/O problems, 3 for validation problems and 4 for numeric divergence.

"""


class PdmToolsError(Exception):
    exit_code = 1


class ArtifactIOError(PdmToolsError, OSError):
    exit_code = 2


class ValidationError(PdmToolsError, ValueError):
    exit_code = 3


class SchemaError(ValidationError):
    def __init__(self, column, path=None):
        self.column = column
        where = " in " + str(path) if path else ""
        super().__init__("missing column '%s'%s" % (column, where))


class ParseError(ValidationError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        super().__init__("row %d: cannot parse %s value %r" % (row, column, value))


class EmptySelectionError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    pass


class DegenerateFeatureError(ValidationError):
    def __init__(self, feature):
        self.feature = feature
        super().__init__("feature '%s' is degenerate (min == max)" % feature)


class ParameterError(ValidationError):
    pass


class ShapeError(ValidationError):
    pass


class BatchSizeError(ValidationError):
    pass


class StateError(ValidationError):
    pass


class AlignmentError(ValidationError):
    def __init__(self, lengths, expected=None):
        self.lengths = dict(lengths)
        detail = ", ".join("%s=%d" % (name, n) for name, n in self.lengths.items())
        msg = "forecast lengths are misaligned (" + detail + ")"
        if expected is not None:
            msg += "; test frame provides %d rows" % expected
        super().__init__(msg)


class ArFitError(ValidationError):
    pass


class PgfFormatError(ValidationError):
    pass


class ConfigError(ValidationError):
    def __init__(self, key, reason):
        self.key = key
        super().__init__("config key '%s': %s" % (key, reason))


class NumericDivergenceError(PdmToolsError, ArithmeticError):
    exit_code = 4


class NumericError(NumericDivergenceError):
    def __init__(self, layer, stage="forward"):
        self.layer = layer
        super().__init__("non-finite values in %s pass of layer '%s'" % (stage, layer))


class TrainingDivergedError(NumericDivergenceError):
    def __init__(self, epoch, what="loss"):
        self.epoch = epoch
        super().__init__("training diverged: non-finite %s at epoch %d" % (what, epoch))


class OptimizationDivergedError(NumericDivergenceError):
    def __init__(self, iteration):
        self.iteration = iteration
        super().__init__("latent optimisation diverged at iteration %d" % iteration)
