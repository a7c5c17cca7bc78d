""" Property suite behind `snce verify` """

from dataclasses import dataclass
import logging

import pandas as pd

from snce.process import log_method

CHECKS = {}


def check(name):
    """
    Register a property check. A check takes a Context and returns
    (passed, measured value, threshold).
    """
    def decorate(fn):
        CHECKS[name] = fn
        return fn
    return decorate


@dataclass(frozen=True)
class Context:
    seed: int = 0
    break_gradient: bool = False
    threads: int = None


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ''


class Verifier(object):
    def __init__(self, seed=0, break_gradient=False, threads=None, only=None):
        self.logger = logging.getLogger('snce.verify.Verifier')
        self.context = Context(seed=int(seed), break_gradient=break_gradient, threads=threads)
        self.names = list(CHECKS) if not only else list(only)

        unknown = [n for n in self.names if n not in CHECKS]
        if unknown:
            raise ValueError('Unknown checks: {}. Registered checks are: {}'.format(
                ', '.join(unknown), ', '.join(CHECKS)))

    def run_one(self, name):
        self.logger.debug('Running check {}'.format(name))
        try:
            passed, value, threshold = CHECKS[name](self.context)
            return CheckResult(name, bool(passed), float(value), float(threshold))
        except Exception as ex:
            self.logger.error('Check {} raised {!r}'.format(name, ex))
            return CheckResult(name, False, float('nan'), float('nan'), repr(ex))

    @log_method('Running verification suite', 'Verification complete')
    def run(self):
        results = [self.run_one(name) for name in self.names]
        failed = [r.name for r in results if not r.passed]
        if failed:
            self.logger.error('Failed checks: {}'.format(', '.join(failed)))

        return results

    @staticmethod
    def table(results):
        return pd.DataFrame([{'check': r.name, 'status': 'PASS' if r.passed else 'FAIL',
                              'value': r.value, 'threshold': r.threshold, 'detail': r.detail}
                             for r in results], columns=['check', 'status', 'value', 'threshold', 'detail'])

    @staticmethod
    def document(results, seed):
        return {
            'seed': seed,
            'passed': all(r.passed for r in results),
            'checks': [{'name': r.name, 'passed': r.passed, 'value': _finite_or_none(r.value),
                        'threshold': _finite_or_none(r.threshold), 'detail': r.detail} for r in results],
        }


def _finite_or_none(x):
    return x if x == x and abs(x) != float('inf') else None


from . import checks
