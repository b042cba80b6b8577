class DomainError(ValueError):
    """Raised when an argument lies outside an operation's mathematical domain."""


class UnreachableTarget(RuntimeError):
    """Raised when a tail target cannot be met on the kernel's represented domain."""
