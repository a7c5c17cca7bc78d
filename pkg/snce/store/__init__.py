""" Store Base Class """

import logging


class Store(object):
    """
    Base class for run artifacts written to or read from disk
    """
    def __init__(self, kind):
        self.logger = logging.getLogger('snce.store.{}'.format(self.__class__.__name__))
        self.kind = kind

    @staticmethod
    def determine(kind):
        return STORES[kind]

    @staticmethod
    def infer(path):
        name = str(path).split('/')[-1]
        if '.' in name:
            return name.split('.')[-1].lower()

        raise EnvironmentError('Cannot determine file type of {}, please enter a valid path.'.format(path))

    @staticmethod
    def for_path(path):
        kind = Store.infer(path)
        if kind not in STORES:
            raise EnvironmentError('No store for .{} files. Supported types are: {}'.format(
                kind, ', '.join(sorted(STORES))))

        return Store.determine(kind)()

    @staticmethod
    def for_table(path):
        """
        Store for a column table, picked from the extension of `path`
        """
        store = Store.for_path(path)
        if store.kind not in TABLES:
            raise EnvironmentError('{} is not a table file. Supported types are: {}'.format(path, ', '.join(TABLES)))

        return store

    def read(self, path):
        raise NotImplementedError

    def write(self, data, path, load_type='overwrite'):
        raise NotImplementedError


from .file import Csv, Json
from .codebook import CodebookFile

STORES = {'csv': Csv, 'json': Json, 'sncb': CodebookFile}
TABLES = ('csv', 'json')
