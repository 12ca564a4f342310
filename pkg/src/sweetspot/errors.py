"""Exception hierarchy shared by every stage of the workflow.

``ConfigError`` subclasses map to CLI exit code 1, ``DataError`` subclasses
to exit code 2.
"""


class SweetspotError(Exception):
    """Base class for all workflow errors."""


class ConfigError(SweetspotError):
    """Invalid configuration or missing input path."""


class DataError(SweetspotError):
    """Input data violates a precondition of the workflow."""


# las_ingest
class LasError(DataError):
    pass


class MissingSection(LasError):
    """A required LAS section (~CURVE or ~ASCII) is absent."""


class WrappedNotSupported(MissingSection):
    """LAS files in wrapped mode (WRAP=YES) are rejected."""


class RowArity(LasError):
    """A data row has a field count different from the curve count."""


class NoDepthCurve(LasError):
    """The first declared curve is not a depth index."""


class DuplicateRaw(DataError):
    """A raw mnemonic maps to two different aliases."""


# formation_map
class DuplicateTop(DataError):
    pass


class UnknownFormation(DataError):
    pass


class MissingCoordinates(DataError):
    pass


class NoDonors(DataError):
    """A formation has no known top anywhere, so nothing can be inferred."""


class NoFormationBelow(DataError):
    pass


class InvertedInterval(DataError):
    pass


# log_frame
class EmptyList(DataError):
    pass


class CurveAbsent(DataError):
    pass


class InsufficientCoverage(DataError):
    pass


class EmptyBlock(DataError):
    pass


# production_frame
class NegativeVolume(DataError):
    pass


class WellAbsent(DataError):
    pass


class FormationUnrecognized(DataError):
    pass


class DuplicateFeature(DataError):
    pass


# fpca
class TooFewWells(DataError):
    pass


class DegenerateGrid(DataError):
    pass


class KOutOfRange(DataError):
    pass


# geostat
class TooFewSamples(DataError):
    pass


class NoSamples(DataError):
    pass


# models / evaluation
class ColumnMismatch(DataError):
    pass


class BadK(DataError):
    pass


class EmptyDataset(DataError):
    pass


class ZeroVariance(DataError):
    pass


class MissingFeatures(DataError):
    """Validation was requested on a frame without interpolated features."""


# synthfield
class ConfigInvalid(ConfigError):
    pass


class Mismatch(DataError):
    pass
