""" Seed streams

Every random draw in the package comes from a numpy Generator built by
`generator(seed, *stream)`. The stream key is a tuple of small integers that
names the consumer, so two consumers never share draws and results do not
depend on the order (or the thread) in which consumers run.
"""

import numpy as np

# Named stream roots
DATA = 1
INIT = 2
BATCH = 3
MASK = 4
TRIAL = 5
SAMPLE = 6
BENCH = 7
VERIFY = 8


def generator(seed, *stream):
    """
    PCG64 generator for `seed` on the given stream key
    """
    if seed is None or int(seed) < 0:
        raise ValueError('seed must be a nonnegative integer, got {}'.format(seed))

    key = tuple(int(s) for s in stream)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))

def parse_seeds(text):
    """
    Turn a '1,2,3' option into a list of ints
    """
    seeds = [int(s) for s in str(text).split(',') if s.strip() != '']
    if not seeds:
        raise ValueError('at least one seed is required')
    if any(s < 0 for s in seeds):
        raise ValueError('seeds must be nonnegative')

    return seeds
