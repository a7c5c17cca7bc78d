""" Objective comparison over seeds, temperature and smoothing grids """

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from os import makedirs
from os.path import join
import logging

import numpy as np
import pandas as pd

from snce.config import Objective, TemperatureSpec
from snce.process import log_method
from snce.store import Csv, Json
from .mixture import discretized_truth
from .trainer import train_toy

logger = logging.getLogger('snce.toy.experiment')

BASE_OBJECTIVES = (Objective.L2_REGRESSION, Objective.CE, Objective.SNCE)
METRICS = ['kl_to_truth', 'tv_to_truth', 'support_size_at_threshold', 'empirical_fit_mass']


@dataclass
class ComparisonTable:
    reports: list
    truth: np.ndarray
    base_config: object

    def summary(self):
        """
        One row per run, then one `mean` row per label
        """
        rows = [dict(label=r.label, objective=r.config.objective.value, seed=str(r.seed),
                     final_loss=r.loss_curve[-1][1], **{m: r.metrics[m] for m in METRICS})
                for r in self.reports]
        runs = pd.DataFrame(rows, columns=['label', 'objective', 'seed'] + METRICS + ['final_loss'])

        means = runs.groupby(['label', 'objective'], sort=False)[METRICS + ['final_loss']].mean().reset_index()
        means.insert(2, 'seed', 'mean')

        return pd.concat([runs, means], ignore_index=True)

    def by_label(self, label):
        return [r for r in self.reports if r.label == label]


def run_configs(base_config, seeds, taus=None, epsilons=None, stochastic=False):
    """
    L2, CE and SNCE per seed, then one SNCE run per tau and one CE+LS run
    per epsilon. With `stochastic` each seed also trains CE on tokens
    re-drawn from q every step, at the base temperature.
    """
    configs = []
    for seed in seeds:
        seeded = base_config.with_changes(seed=int(seed))
        configs.extend(seeded.with_changes(objective=o) for o in BASE_OBJECTIVES)
        configs.extend(seeded.with_changes(objective=Objective.SNCE, temperature=TemperatureSpec(tau=float(tau)))
                       for tau in (taus or []))
        configs.extend(seeded.with_changes(objective=Objective.LABEL_SMOOTHING, epsilon=float(eps))
                       for eps in (epsilons or []))
        if stochastic:
            configs.append(seeded.with_changes(objective=Objective.STOCHASTIC_QUANTIZATION))

    return configs

@log_method('Comparing toy objectives', 'Comparison complete')
def compare_objectives(base_config, seeds, taus=None, epsilons=None, threads=None, stochastic=False):
    if not seeds:
        raise ValueError('compare_objectives needs at least one seed')

    configs = run_configs(base_config, seeds, taus, epsilons, stochastic)
    logger.info('Running {} toy configurations'.format(len(configs)))

    if not threads or threads <= 1:
        reports = [train_toy(c) for c in configs]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            reports = list(pool.map(train_toy, configs))

    truth = discretized_truth(base_config.mixture, base_config.grid)
    return ComparisonTable(reports=reports, truth=truth, base_config=base_config)

def write_comparison(table, out_dir):
    """
    truth_grid.csv and summary.csv at the top, report.json and
    learned_grid.csv under <label>/seed_<seed>/
    """
    n = table.base_config.grid.n_per_axis
    csv, js = Csv(), Json()

    makedirs(out_dir, exist_ok=True)
    paths = [csv.write_grid(table.truth, n, join(out_dir, 'truth_grid.csv'))]

    for report in table.reports:
        run_dir = join(out_dir, report.label, 'seed_{}'.format(report.seed))
        makedirs(run_dir, exist_ok=True)
        paths.append(js.write(report.to_dict(), join(run_dir, 'report.json')))
        paths.append(csv.write_grid(report.learned, n, join(run_dir, 'learned_grid.csv')))

    paths.append(csv.write(table.summary(), join(out_dir, 'summary.csv')))
    return paths
