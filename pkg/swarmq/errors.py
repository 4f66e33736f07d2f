"""
Exception hierarchy for swarmq
"""

from typing import Optional


class SwarmError(Exception):
    """Base class for every error raised by swarmq"""


class ConfigurationError(SwarmError, ValueError):
    """Run parameters violate a bound; the message names the bound"""


class FitnessDomainError(SwarmError, ValueError):
    """A fitness function was evaluated outside its declared box"""


class RngArgumentError(SwarmError, ValueError):
    """Invalid arguments to a random draw (lo > hi, coordinate out of range)"""


class UnknownNameError(SwarmError, KeyError):
    """Registry lookup for an engine or fitness name that does not exist"""

    def __init__(self, kind: str, name: str, known: list[str]) -> None:
        self.kind = kind
        self.name = name
        self.known = sorted(known)
        super().__init__(f"unknown {kind} '{name}' (known: {', '.join(self.known)})")

    def __str__(self) -> str:
        return self.args[0]


class GroupRuntimeError(SwarmError, RuntimeError):
    """A worker body failed; identifies the group and, when known, the lane"""

    def __init__(self, group: int, lane: Optional[int], cause: BaseException) -> None:
        self.group = group
        self.lane = lane
        self.cause = cause
        where = f"group {group}" if lane is None else f"group {group}, lane {lane}"
        super().__init__(f"worker failed in {where}: {cause!r}")


class LockStateError(SwarmError, RuntimeError):
    """The global lock was released by a caller that does not hold it"""


class MissingBaselineError(SwarmError, ValueError):
    """A comparison table cell has no serial baseline row"""
