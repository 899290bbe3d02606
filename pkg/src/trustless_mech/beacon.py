"""Randomness beacon: modular-sum aggregation and hash-stream permutations.

A contribution is an unsigned 64-bit integer. The beacon output is the sum
of all verified contributions mod 2^64, so a single honestly random
contributor makes the output uniform no matter what the others do.

Permutations for lotteries and tie-breaking come from a deterministic
SHA-256 byte stream seeded by the beacon value. Index draws use rejection
sampling, so a uniform seed stream yields exactly uniform permutations.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping

from .errors import ValidationError, WireFormatError

U64_MASK = (1 << 64) - 1
CONTRIBUTION_SIZE = 8

# Stream domains used by scenario plumbing (permutation domains for school
# lotteries are the school indices themselves, with 0 doubling as the
# single-lottery / tie-break domain).
DOMAIN_TIE_BREAK = 0
DOMAIN_SALTS = 2**32 + 1
DOMAIN_CONTRIBUTIONS = 2**32 + 2
DOMAIN_UNIFORMITY = 2**32 + 3


def _check_u64(value: int, what: str) -> int:
    if not 0 <= value <= U64_MASK:
        raise ValidationError(f"{what} must be an unsigned 64-bit integer, got {value}")
    return value


@dataclass(frozen=True)
class BeaconOutput:
    """Aggregated public random value plus the agents that produced it."""

    value: int
    contributors: tuple[str, ...]

    def __post_init__(self) -> None:
        _check_u64(self.value, "beacon value")


def aggregate(contributions: Mapping[str, int]) -> BeaconOutput:
    """Sum all contributions mod 2^64; contributors listed in identifier order.

    An empty map aggregates to 0 so settlement can proceed after mass
    exclusion; downstream consumers flag that degenerate case.
    """
    total = 0
    for agent in contributions:
        total += _check_u64(contributions[agent], f"contribution from {agent!r}")
    return BeaconOutput(value=total & U64_MASK, contributors=tuple(sorted(contributions)))


def encode_contribution(value: int) -> bytes:
    """8 big-endian bytes, the wire form used inside reveal payloads."""
    return _check_u64(value, "contribution").to_bytes(CONTRIBUTION_SIZE, "big")


def decode_contribution(data: bytes) -> int:
    if len(data) != CONTRIBUTION_SIZE:
        raise WireFormatError(
            f"contribution must be {CONTRIBUTION_SIZE} bytes, got {len(data)}"
        )
    return int.from_bytes(data, "big")


class HashStream:
    """Deterministic byte stream: block j = SHA-256(seed_8be || domain_8be || j_8be).

    One seeded source backs every derived random quantity in the simulator:
    beacon permutations, scenario salts, honest contributions, and the
    uniformity experiment's draws.
    """

    def __init__(self, seed: int, domain: int = 0):
        self._prefix = _check_u64(seed, "stream seed").to_bytes(8, "big") + _check_u64(
            domain, "stream domain"
        ).to_bytes(8, "big")
        self._block_index = 0
        self._buffer = b""

    def read(self, n: int) -> bytes:
        while len(self._buffer) < n:
            block = hashlib.sha256(
                self._prefix + self._block_index.to_bytes(8, "big")
            ).digest()
            self._buffer += block
            self._block_index += 1
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def u64(self) -> int:
        return int.from_bytes(self.read(8), "big")

    def salt(self) -> bytes:
        return self.read(32)

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection sampling (no modulo bias)."""
        if bound < 1:
            raise ValidationError(f"randbelow bound must be positive, got {bound}")
        if bound == 1:
            return 0
        nbytes = ((bound - 1).bit_length() + 7) // 8
        span = 1 << (8 * nbytes)
        limit = span - span % bound
        while True:
            draw = int.from_bytes(self.read(nbytes), "big")
            if draw < limit:
                return draw % bound

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates shuffle of the identity permutation on {0..n-1}."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm


def derive_permutation(output: BeaconOutput, n: int, domain: int = 0) -> list[int]:
    """Permutation of {0..n-1} derived from the beacon value.

    ``domain`` separates independent lotteries drawn from one beacon output
    (0 for the shared lottery and tie-breaking, school index for per-school
    lotteries).
    """
    if n < 1:
        raise ValidationError(f"permutation domain must be non-empty, got n={n}")
    return HashStream(output.value, domain).permutation(n)


# A worst-case-flavored set of fixed contributions: zero, the wraparound
# extremes, and a dense bit pattern. One honest uniform player must wash
# all of them out.
ADVERSARY_CONSTANTS = {
    "adv_zero": 0,
    "adv_one": 1,
    "adv_max": U64_MASK,
    "adv_bits": 0x0123456789ABCDEF,
}


def uniformity_histogram(trials: int, seed: int = 0, bins: int = 64) -> list[int]:
    """Histogram of aggregate(...) mod ``bins`` with one honest contributor.

    Each trial sums one uniform draw on {0..2^63} with the four fixed
    adversarial constants; the returned counts feed a chi-square check of
    the claim that a single honest player keeps the output uniform.
    """
    if trials < 1:
        raise ValidationError(f"need at least one trial, got {trials}")
    stream = HashStream(seed, DOMAIN_UNIFORMITY)
    counts = [0] * bins
    for _ in range(trials):
        honest = stream.randbelow(2**63 + 1)
        value = aggregate({"honest": honest, **ADVERSARY_CONSTANTS}).value
        counts[value % bins] += 1
    return counts
