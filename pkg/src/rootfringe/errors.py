"""Exception hierarchy. CLI exit codes are attached to the families."""


class RootFringeError(Exception):
    exit_code = 1


class InputError(RootFringeError):
    exit_code = 2


class IoFailure(RootFringeError):
    exit_code = 3


class MalformedHeader(IoFailure):
    pass


class UnsupportedMaxval(IoFailure):
    pass


class TruncatedData(IoFailure):
    pass


class NonFiniteSample(IoFailure):
    pass


class ArityMismatch(InputError):
    pass


class CarrierError(RootFringeError):
    exit_code = 4


class CarrierOverlapsDC(CarrierError):
    pass


class CarrierOutOfBand(CarrierError):
    pass


class NonFiniteInput(RootFringeError):
    pass


class NoConvergence(RootFringeError):
    pass


class DegreeZero(RootFringeError):
    pass


class NoInteriorRoot(RootFringeError):
    pass


class DegenerateWindow(RootFringeError):
    pass


class OutOfBounds(RootFringeError):
    pass


class FieldTooSmall(RootFringeError):
    exit_code = 5


class EmptyInput(InputError):
    pass


class InvalidSpec(InputError):
    pass


class InvalidGeometry(InputError):
    pass


class WrappedInput(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class UnsortedTimes(InputError):
    pass
