"""Lossy broadcast of log records to every client, with archive catch-up."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ArchiveUnavailableError
from .client import ClientState
from .log import Change, ChangeLog


@dataclass(frozen=True)
class LossModel:
    seed: int = 0
    probability: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("loss probability must be in [0, 1]")


@dataclass
class RoundReport:
    first_seq: int
    last_seq: int
    delivered: int = 0
    lost: int = 0
    catch_up_calls: int = 0
    stale_clients: list[int] = field(default_factory=list)


def _drain(client: ClientState, buffer: dict[int, Change]) -> None:
    run = []
    nxt = client.applied_seq + 1
    while nxt in buffer:
        run.append(buffer.pop(nxt))
        nxt += 1
    if run:
        client.apply(run)


def catch_up(client: ClientState, archive: ChangeLog, buffer: dict[int, Change] | None = None) -> int:
    """Bring ``client`` to the archive head; returns the number of records replayed."""
    buffer = {} if buffer is None else buffer
    head = archive.head_seq
    if client.applied_seq >= head:
        return 0
    missing = archive.replay(client.applied_seq + 1, head)
    client.catch_up_calls += 1
    for change in missing:
        buffer.setdefault(change.seq, change)
    _drain(client, buffer)
    return len(missing)


def broadcast_round(
    archive: ChangeLog,
    clients: Sequence[ClientState],
    loss_model: LossModel,
    records: Sequence[Change] | None = None,
    round_no: int = 0,
) -> RoundReport:
    """Deliver one round of records to every client and repair gaps.

    Each (client, record) delivery is dropped independently with the loss
    probability; surviving records arrive in a random order and are buffered
    until they can be applied in sequence. Gaps are detected at the end of
    the round and filled from the archive. A client whose catch-up fails
    because the archive is offline is flagged ``stale``.
    """
    if records is None:
        start = min((c.applied_seq for c in clients), default=archive.head_seq) + 1
        records = archive.replay(start, archive.head_seq)
    records = list(records)
    report = RoundReport(records[0].seq if records else 0, records[-1].seq if records else 0)
    rng = np.random.default_rng([loss_model.seed, round_no])
    n = len(records)
    for client in clients:
        lost = rng.random(n) < loss_model.probability
        order = rng.permutation(n)
        buffer: dict[int, Change] = {}
        for i in order:
            if lost[i]:
                report.lost += 1
                continue
            change = records[i]
            report.delivered += 1
            if change.seq > client.applied_seq:
                buffer[change.seq] = change
                _drain(client, buffer)
        if client.applied_seq < archive.head_seq:
            try:
                catch_up(client, archive, buffer)
                report.catch_up_calls += 1
                client.stale = False
            except ArchiveUnavailableError:
                client.stale = True
                report.stale_clients.append(client.client_id)
        else:
            client.stale = False
    return report
