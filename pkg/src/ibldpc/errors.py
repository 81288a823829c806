"""Exception types shared across the toolkit."""


class IbldpcError(Exception):
    """Base class for all toolkit errors."""


class UnsupportedRate(IbldpcError):
    """Requested code rate falls outside the base-graph template range."""


class UnsupportedK(IbldpcError):
    """Information block length exceeds k_b * Zmax for the base graph."""


class EncodingSingular(IbldpcError):
    """The core parity system could not be solved (table/template bug)."""


class InfiniteLLR(IbldpcError):
    """A log-likelihood ratio is +/-infinity; the caller must clip."""


class ParamsMismatch(IbldpcError):
    """Decoder parameters were designed for a different code configuration."""


class SchemaMismatch(IbldpcError):
    """Parameter file version/checksum does not match this reader."""


class NoConvergence(IbldpcError):
    """A search did not bracket a usable optimum."""


class IncompatibleRates(IbldpcError):
    """Rate set mixes base graphs or is otherwise not jointly designable."""
