"""Counter-based random streams keyed on ``(seed, trial_index)``.

Every trial of every campaign draws from its own Philox stream whose 128-bit
key packs the 64-bit master seed and the trial index.  Draw ``j`` of a stream
is a pure function of ``(seed, trial_index, stream, j)``, so results do not
depend on how trials are distributed over workers.
"""
import numpy as np

_MASK64 = (1 << 64) - 1

# distinct high counter words keep the consumers of one (seed, trial) apart
KOSTLAN = 0
GOE = 1
HAAR = 2
JITTER = 3
PERTURB = 4


def trial_generator(seed, trial_index=0, stream=KOSTLAN):
    """Return a numpy ``Generator`` for one trial.

    Parameters
    ----------
    seed : int
        Master seed; reduced modulo 2**64.
    trial_index : int
        Nonnegative trial number (< 2**64).
    stream : int
        Consumer tag, placed in the top word of the Philox counter.
    """
    if trial_index < 0:
        raise ValueError("trial_index must be nonnegative")
    key = (int(seed) & _MASK64) | ((int(trial_index) & _MASK64) << 64)
    counter = np.array([0, 0, 0, int(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
