""" File Stores """

import json

import numpy as np
import pandas as pd

from snce.process import log_method
from . import Store


def _plain(value):
    """
    Convert numpy scalars and arrays into JSON-native values
    """
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)

    return value


class Csv(Store):
    def __init__(self, kind='csv'):
        super(Csv, self).__init__('csv')

    @log_method('Reading data from CSV file', 'Reading complete')
    def read(self, path, header='infer'):
        return pd.read_csv(path, header=header)

    @log_method('Writing data to CSV file', 'Writing complete')
    def write(self, data, path, load_type='overwrite', header=True):
        if load_type != 'overwrite':
            raise ValueError('Load type {} is not currently implemented. Please use overwrite'.format(load_type))

        data = data if isinstance(data, pd.DataFrame) else pd.DataFrame(data)
        data.to_csv(path, index=False, header=header, encoding='utf-8', float_format='%.17g')

        self.logger.debug('Wrote {} rows to {}'.format(len(data), path))
        return path

    def write_grid(self, values, n_per_axis, path):
        """
        Write a length n*n vector in grid order as n rows of n columns
        (row = y index, column = x index)
        """
        grid = np.asarray(values, dtype=np.float64).reshape(int(n_per_axis), int(n_per_axis))
        return self.write(pd.DataFrame(grid), path, header=False)

    def read_grid(self, path):
        return self.read(path, header=None).to_numpy(dtype=np.float64)


class Json(Store):
    def __init__(self, kind='json'):
        super(Json, self).__init__('json')

    @log_method('Reading data from JSON file', 'Reading complete')
    def read(self, path):
        with open(path, 'r') as f:
            return json.load(f)

    @log_method('Writing data to JSON file', 'Writing complete')
    def write(self, data, path, load_type='overwrite'):
        if load_type != 'overwrite':
            raise ValueError('Load type {} is not currently implemented. Please use overwrite'.format(load_type))

        with open(path, 'w') as f:
            json.dump(_plain(data), f, indent=2, sort_keys=True, allow_nan=False)
            f.write('\n')

        return path

    @staticmethod
    def line(record):
        return json.dumps(_plain(record), sort_keys=True, allow_nan=False)
