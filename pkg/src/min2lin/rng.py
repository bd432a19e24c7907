"""Counter-based seed splitting: one 64-bit base seed, one seed per trial.

splitmix64 is the standard finalizer; distinct (base, counter) pairs give
independent-looking 64-bit seeds, and every derived seed is recorded in
the output that used it so runs are reproducible.
"""

MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def spawn_seed(base: int, counter: int) -> int:
    return splitmix64((base & MASK) ^ splitmix64(counter & MASK))
