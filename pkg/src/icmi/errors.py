"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameter or scenario configuration."""


class DataError(ValueError):
    """Unreadable or malformed input data."""
