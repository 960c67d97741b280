from .broadcast import LossModel, RoundReport, broadcast_round, catch_up
from .client import ClientState, apply
from .log import Change, ChangeKind, ChangeLog, frame, state_at

__all__ = [
    "Change",
    "ChangeKind",
    "ChangeLog",
    "ClientState",
    "LossModel",
    "RoundReport",
    "apply",
    "broadcast_round",
    "catch_up",
    "frame",
    "state_at",
]
