""" Codebook files

Little-endian layout: magic 'SNCB', u32 version (1), u32 K, u32 D, u8 metric,
three zero padding bytes, then K*D float32 values row-major.
"""

import numpy as np

from snce.codebook import Codebook, CodebookError, Metric
from snce.process import log_method
from . import Store

MAGIC = b'SNCB'
VERSION = 1

HEADER = np.dtype([
    ('magic', 'S4'),
    ('version', '<u4'),
    ('K', '<u4'),
    ('D', '<u4'),
    ('metric', 'u1'),
    ('pad', 'u1', (3,)),
])


class CodebookFormatError(CodebookError):
    pass


class CodebookTruncatedError(CodebookError):
    pass


class NonFiniteCodebookError(CodebookError):
    pass


class CodebookFile(Store):
    def __init__(self, kind='sncb'):
        super(CodebookFile, self).__init__('sncb')

    @log_method('Reading codebook file', 'Reading complete')
    def read(self, path):
        with open(path, 'rb') as f:
            raw = f.read()

        return self.decode(raw, name=path)

    @log_method('Writing codebook file', 'Writing complete')
    def write(self, codebook, path, load_type='overwrite'):
        if load_type != 'overwrite':
            raise ValueError('Codebook files only support overwrite, got {}'.format(load_type))

        with open(path, 'wb') as f:
            f.write(self.encode(codebook))

        self.logger.debug('Wrote {!r} to {}'.format(codebook, path))
        return path

    def encode(self, codebook):
        header = np.zeros(1, dtype=HEADER)
        header['magic'] = MAGIC
        header['version'] = VERSION
        header['K'] = codebook.K
        header['D'] = codebook.D
        header['metric'] = int(codebook.metric)

        return header.tobytes() + np.ascontiguousarray(codebook.vectors, dtype='<f4').tobytes()

    def decode(self, raw, name='<bytes>'):
        if len(raw) < 4 or raw[:4] != MAGIC:
            raise CodebookFormatError('{} is not a codebook file (bad magic bytes)'.format(name))
        if len(raw) < HEADER.itemsize:
            raise CodebookTruncatedError('{} ends inside the header'.format(name))

        header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
        if int(header['version']) != VERSION:
            raise CodebookFormatError('{} has unsupported format version {}'.format(name, int(header['version'])))
        if int(header['metric']) not in {int(m) for m in Metric}:
            raise CodebookFormatError('{} has unknown metric byte {}'.format(name, int(header['metric'])))
        if np.any(header['pad']):
            raise CodebookFormatError('{} has nonzero padding bytes'.format(name))

        K, D = int(header['K']), int(header['D'])
        if K < 1 or D < 1:
            raise CodebookFormatError('{} declares an empty codebook (K={}, D={})'.format(name, K, D))

        expected = K * D * 4
        payload = raw[HEADER.itemsize:]
        if len(payload) < expected:
            raise CodebookTruncatedError('{} declares {}x{} values but holds {} payload bytes'.format(
                name, K, D, len(payload)))
        if len(payload) > expected:
            raise CodebookFormatError('{} has {} trailing bytes'.format(name, len(payload) - expected))

        vectors = np.frombuffer(payload, dtype='<f4').reshape(K, D)
        if not np.all(np.isfinite(vectors)):
            raise NonFiniteCodebookError('{} contains non-finite code values'.format(name))

        return Codebook(vectors, Metric(int(header['metric'])))


def save_codebook(codebook, path):
    return CodebookFile().write(codebook, path)

def load_codebook(path):
    return CodebookFile().read(path)
