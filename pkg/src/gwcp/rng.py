"""Seeding and counter-based hashing.

Every random quantity in the package is derived from a master seed and an
integer counter, so results never depend on evaluation order or worker count.
Per-trial streams use numpy's counter-based Philox generator; tree shapes use
a stateless splitmix64 hash of (tree seed, vertex key).
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

# salts separating the hash uses of a single vertex key
SALT_COUNT = np.uint64(0x243F6A8885A308D3)
SALT_CHILD = np.uint64(0x13198A2E03707344)


def splitmix64(x):
    """Vectorised splitmix64 finaliser on uint64 input (wrapping arithmetic)."""
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        z = z ^ (z >> _S31)
    return z


_MASK = 0xFFFFFFFFFFFFFFFF


def splitmix64_int(x: int) -> int:
    """Scalar splitmix64 on Python ints; bit-identical to :func:`splitmix64`."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def to_unit(bits):
    """Map uint64 hash output to doubles in [0, 1) using the top 53 bits."""
    return (np.asarray(bits, dtype=np.uint64) >> _S11).astype(np.float64) * (1.0 / 9007199254740992.0)


def trial_streams(seed: int, trial: int) -> tuple[int, np.random.Generator]:
    """Return ``(tree_seed, process_rng)`` for trial ``trial`` of master seed ``seed``.

    Both are pure functions of ``(seed, trial)``.
    """
    ss = np.random.SeedSequence([int(seed), int(trial)])
    tree_ss, proc_ss = ss.spawn(2)
    tree_seed = int(tree_ss.generate_state(1, np.uint64)[0])
    return tree_seed, np.random.Generator(np.random.Philox(proc_ss))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


class UniformBuffer:
    """Block-drawn uniforms for event loops.

    Drawing one double at a time from a Generator costs about a microsecond of
    Python overhead; the event engines pull from a refilled block instead. The
    block starts small and doubles up to ``max_block`` so short runs stay
    cheap. The sequence consumed is a deterministic function of the stream.
    """

    __slots__ = ("_rng", "_block", "_max", "_buf", "_i")

    def __init__(self, rng: np.random.Generator, max_block: int = 4096):
        self._rng = rng
        self._block = 32
        self._max = max_block
        self._buf = rng.random(self._block).tolist()
        self._i = 0

    def next(self) -> float:
        if self._i == self._block:
            self._block = min(2 * self._block, self._max)
            self._buf = self._rng.random(self._block).tolist()
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return u
