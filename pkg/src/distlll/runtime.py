"""Round accounting and seeded per-node randomness for LOCAL-model simulation.

A step that gathers the radius-r neighborhood of every node is charged r
rounds; local computation is free. Randomness comes from counter-based
streams keyed by (master seed, node, phase), so nodes never share state and
the order in which a simulator visits them cannot change any output.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .exceptions import ParameterError

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_NODE_MULT = 0xD1B54A32D192ED03


def mix64(z: int) -> int:
    """splitmix64 finalizer: a bijective 64-bit mixing function."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


@lru_cache(maxsize=4096)
def _phase_key(phase) -> int:
    if isinstance(phase, int):
        return mix64(phase * _GOLDEN + 0x632BE59BD9B4E019)
    digest = hashlib.blake2b(repr(phase).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class NodeStream:
    """Counter-based pseudo-random stream (splitmix64 over a derived key)."""

    __slots__ = ("_key", "_ctr")

    def __init__(self, key: int):
        self._key = key & _MASK
        self._ctr = 0

    def next64(self) -> int:
        self._ctr += 1
        z = (self._key + self._ctr * _GOLDEN) & _MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next64() >> 11) * (1.0 / 9007199254740992.0)

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection, exact for any ``n >= 1``."""
        if n <= 0:
            raise ParameterError("randbelow needs n >= 1")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        if bits <= 64:
            # inlined next64
            shift = 64 - bits
            key = self._key
            ctr = self._ctr
            while True:
                ctr += 1
                z = (key + ctr * _GOLDEN) & _MASK
                z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
                z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
                x = (z ^ (z >> 31)) >> shift
                if x < n:
                    self._ctr = ctr
                    return x
        words = (bits + 63) // 64
        extra = words * 64 - bits
        while True:
            x = 0
            for _ in range(words):
                x = (x << 64) | self.next64()
            x >>= extra
            if x < n:
                return x

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, population, k: int) -> list:
        pool = list(population)
        if not 0 <= k <= len(pool):
            raise ParameterError("sample size out of range")
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


@dataclass(frozen=True)
class SeedContext:
    """Immutable master seed from which every node/phase stream is derived."""

    master_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed <= _MASK:
            raise ParameterError("master seed must be an unsigned 64-bit integer")

    def stream(self, node: int, phase=0) -> NodeStream:
        key = mix64(mix64(self.master_seed ^ _phase_key(phase)) + (node & _MASK) * _NODE_MULT)
        return NodeStream(mix64(key))

    def derive(self, *tags) -> "SeedContext":
        """Child context for an independent sub-run (e.g. a retry)."""
        return SeedContext(mix64(self.master_seed ^ _phase_key(("derive",) + tags)))


def node_stream(ctx: SeedContext, node: int, phase=0) -> NodeStream:
    return ctx.stream(node, phase)


@dataclass
class RoundLedger:
    """Append-only list of (label, rounds) charges."""

    phases: list = field(default_factory=list)
    total: int = 0

    def charge(self, label: str, r: int) -> "RoundLedger":
        r = int(r)
        if r < 0:
            raise ParameterError("round charge must be nonnegative")
        self.phases.append((str(label), r))
        self.total += r
        return self

    def extend(self, other: "RoundLedger", prefix: str = "") -> "RoundLedger":
        for label, r in other.phases:
            self.charge(prefix + label, r)
        return self

    def to_dict(self) -> dict:
        return {"phases": [[label, r] for label, r in self.phases], "total": self.total}

    @classmethod
    def from_dict(cls, data: dict) -> "RoundLedger":
        led = cls()
        for label, r in data.get("phases", []):
            led.charge(label, r)
        return led


def charge(ledger: RoundLedger, label: str, r: int) -> RoundLedger:
    return ledger.charge(label, r)


def charge_parallel(ledger: RoundLedger, label: str, subledgers) -> RoundLedger:
    """Charge the maximum total of sub-runs that execute side by side."""
    return ledger.charge(label, max((s.total for s in subledgers), default=0))


def log_star(n: float) -> int:
    """Iterated base-2 logarithm: times log2 is applied until the value is <= 1."""
    count = 0
    x = float(n)
    while x > 1.0:
        x = math.log2(x)
        count += 1
    return count
