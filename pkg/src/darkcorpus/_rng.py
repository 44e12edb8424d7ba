"""Seed mixing shared by every stage that consumes randomness."""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x`` (the state is advanced first)."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix_stream(seed: int, count: int) -> list[int]:
    """``count`` successive splitmix64 outputs starting from ``seed``."""
    out = []
    state = seed & MASK64
    for _ in range(count):
        out.append(splitmix64(state))
        state = (state + GOLDEN_GAMMA) & MASK64
    return out


def derive_seed(seed: int, salt: int) -> int:
    return splitmix64((seed ^ salt) & MASK64)
