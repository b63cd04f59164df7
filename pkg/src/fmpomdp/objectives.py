"""The six inverse-kinematics objectives and their conditioning keys.

AH    (o_{1:t}, o_{1:t+k})         AH_A   same with augmented observations
FJ    past window at t and t+k     FJ_A   same with augmented observations
MIK   past window at t, future window at t+k; MIK_A augmented
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

from .errors import OutOfRange
from .trajectories import Trajectory, future_window, past_window, window_payload


class Objective(str, Enum):
    AH = "AH"
    AH_A = "AH_A"
    FJ = "FJ"
    FJ_A = "FJ_A"
    MIK = "MIK"
    MIK_A = "MIK_A"

    @property
    def with_actions(self) -> bool:
        return self.value.endswith("_A")

    @property
    def family(self) -> str:
        return self.value.split("_")[0]

    @classmethod
    def parse(cls, name: str) -> "Objective":
        return cls(name.upper().replace("+", "_"))


_TAGS = list(Objective)
_HEAD = struct.Struct(">3sBBHHHH")
_MAGIC = b"CK1"


@dataclass(frozen=True, order=True)
class ConditioningKey:
    objective: Objective
    t: int
    k: int
    first: tuple
    second: tuple

    def to_bytes(self) -> bytes:
        """Big-endian layout: magic, tag, with_actions, t, k, len(first), len(second),
        then int16 obs (and int16 previous action when with_actions) per element."""
        wa = self.objective.with_actions
        out = [_HEAD.pack(_MAGIC, _TAGS.index(self.objective), wa, self.t, self.k,
                          len(self.first), len(self.second))]
        for e in self.first + self.second:
            out.append(struct.pack(">hh", *e) if wa else struct.pack(">h", e))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ConditioningKey":
        magic, tag, wa, t, k, n1, n2 = _HEAD.unpack_from(data)
        if magic != _MAGIC:
            raise ValueError("not a conditioning key")
        fmt = ">hh" if wa else ">h"
        size = struct.calcsize(fmt)
        elems = []
        for i in range(n1 + n2):
            v = struct.unpack_from(fmt, data, _HEAD.size + i * size)
            elems.append(v if wa else v[0])
        return cls(_TAGS[tag], t, k, tuple(elems[:n1]), tuple(elems[n1:]))


def key_bounds(objective: Objective, t: int, k: int, m: int, n: int, H: int) -> tuple[int, int]:
    """Time range lo..hi a trajectory must cover to build the key."""
    if k < 1 or t < 1 or t + k > H:
        raise OutOfRange(f"need 1 <= t and t + k <= H, got t={t}, k={k}, H={H}")
    fam = objective.family
    if fam == "AH":
        return 1, t + k
    if fam == "FJ":
        return max(1, t - m), t + k
    if t + k + n > H:
        raise OutOfRange(f"MIK keys need t + k + n <= H, got {t}+{k}+{n} > {H}")
    return max(1, t - m), t + k + n


def make_key(objective: Objective, traj: Trajectory, t: int, k: int, m: int, n: int) -> ConditioningKey:
    objective = Objective(objective)
    H = traj.horizon if traj.horizon is not None else traj.end
    key_bounds(objective, t, k, m, n, H)
    wa = objective.with_actions
    fam = objective.family
    if fam == "AH":
        first = window_payload(traj, 1, t, wa)
        second = window_payload(traj, 1, t + k, wa)
    elif fam == "FJ":
        first = past_window(traj, t, m, wa).payload
        second = past_window(traj, t + k, m, wa).payload
    else:
        first = past_window(traj, t, m, wa).payload
        second = future_window(traj, t + k, n, wa).payload
    return ConditioningKey(objective, t, k, first, second)


def usable_ks(objective: Objective, m: int, n: int, D: int) -> list[int]:
    """Gaps k at which the objective's Bayes classifier is the multi-step inverse."""
    fam = Objective(objective).family
    if fam == "MIK":
        return list(range(1, D + 1))
    if fam == "FJ":
        return [k for k in range(1, D + 1) if k > m]
    return []


def closed_form(objective: Objective, k: int, m: int) -> str:
    """'multi', 'one-step' or 'constant': the claimed Bayes-optimal form at gap k."""
    objective = Objective(objective)
    fam = objective.family
    if fam == "MIK" or (fam == "FJ" and k > m):
        return "multi"
    if objective.with_actions:
        return "constant"
    return "one-step"


def information_gaps(objective: Objective, m: int, K_max: int) -> list[int]:
    """Gaps whose state-level rows make up the objective's row family.

    usable_ks plus the one-step inverse that AH reduces to at every k.
    """
    objective = Objective(objective)
    gaps = usable_ks(objective, m, 0, K_max)
    if objective is Objective.AH:
        gaps = [1]
    return gaps
