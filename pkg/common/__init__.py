from . import manifest


VERSION = "0.3.0"

# imaginary residue that to_physical silently drops
IMAG_RESIDUE_TOL = 1e-10
# mean tolerated on input to the f-model right-hand sides
MEAN_ZERO_TOL = 1e-12
# exponent above which e^x is treated as overflow in the symbols
EXP_OVERFLOW = 700.0
# (7/3)(1 + 3/2), the self-similar radius factor used for the elastic model
SELFSIMILAR_FACTOR = 35.0 / 6.0

TERMINATION_EXIT_CODES = {
    "reached_t_end": 0,
    "blowup_cap_hit": 2,
    "dt_underflow": 2,
}


class BiofilmError(Exception):
    pass


class ArgumentError(BiofilmError, ValueError):
    pass


class StateError(BiofilmError):
    pass


class ContractError(BiofilmError):
    pass


class UnsupportedConfiguration(BiofilmError):
    pass


class ConfigError(BiofilmError):
    pass


class NumericalFailure(BiofilmError):
    def __init__(self, message, t=None, step=None):
        if t is not None or step is not None:
            message = "{} (t={}, step={})".format(message, t, step)
        super().__init__(message)
        self.t = t
        self.step = step


def csv_number(value) -> str:
    """Full double precision, '.' decimal separator."""
    return "{:.17g}".format(float(value))
