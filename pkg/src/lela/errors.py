"""Exception types and the process exit codes they map to."""


class LelaError(Exception):
    """Base class; `exit_code` is what the CLI returns on abort."""

    exit_code = 1


class ConfigError(LelaError):
    exit_code = 1


class DegenerateMapError(LelaError):
    """Jacobian fell below jac_floor: the mesh is tangling."""

    exit_code = 2


class EosRangeError(LelaError):
    """e'(h) left its admissible range during evolution."""

    exit_code = 3


class EpsilonTooSmallError(LelaError):
    """Initial-data iteration failed to contract; sound speed too small."""

    exit_code = 4


class HorizonTooLongError(LelaError):
    """Picard iteration failed to contract on the requested horizon."""

    exit_code = 5
