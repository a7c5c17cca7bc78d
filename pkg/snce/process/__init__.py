""" Process module for logging methods and stuff """
from functools import wraps
from time import time
import logging


def open_file(file_path):
    with open(file_path, 'r') as f:
        return f.read()

def log_method(begin, end):
    """
    Log `begin` before the call and `end` with the elapsed seconds after it.
    Methods log through `self.logger`; plain functions through the logger of
    their module.
    """
    def decorate(fn):
        @wraps(fn)
        def wrapper(*args, **kwargs):
            owner = getattr(args[0], 'logger', None) if args else None
            logger = owner if isinstance(owner, logging.Logger) else logging.getLogger(fn.__module__)
            logger.info(begin)
            start_time = time()

            ret = fn(*args, **kwargs)

            logger.info('{}, {}s'.format(end, round(time() - start_time, 2)))
            return ret

        return wrapper
    return decorate

def log_init(name, level):
    logger = logging.getLogger(name)
    logger.setLevel(level)

    fmt = logging.Formatter('%(asctime)s | %(name)-24s | %(levelname)8s | %(message)s')

    # stderr, so JSON lines on stdout stay parseable
    if not logger.handlers:
        sh = logging.StreamHandler()
        sh.setLevel(logging.DEBUG)
        sh.setFormatter(fmt)
        logger.addHandler(sh)

    return logger

def set_level(level):
    Logger.setLevel(level)


Logger = log_init('snce', logging.INFO)
