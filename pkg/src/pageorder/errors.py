"""Exceptions shared across subpackages."""


class ConfigError(ValueError):
    """A configuration value violates its documented constraints."""


class DomainError(ValueError):
    """An input is outside the domain an operation is defined on."""
