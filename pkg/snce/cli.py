""" Command Line Interface """
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import update_wrapper
from os import makedirs
from os.path import join
import logging

import click
import numpy as np

from snce import __version__
from snce.bench import Benchmark
from snce.codebook import Metric, distances, grid_codebook, random_codebook
from snce.config import ConfigError, ConfigLoader, DEFAULT_PATH, config_hash, to_dict
from snce.neighbor import Temperature, log_neighbor_distribution, neighbor_distribution_topk
from snce.process import Logger, set_level
from snce.process.seeding import parse_seeds
from snce.store import Json, Store
from snce.store.codebook import load_codebook, save_codebook
from snce.toy import DivergenceError, compare_objectives, write_comparison
from snce.verify import Verifier, CHECKS

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int = None
    tool_version: str = __version__
    started: str = None
    finished: str = None
    exit_code: int = None
    outputs: list = field(default_factory=list)

    @property
    def config_hash(self):
        return config_hash(self.config)

    def to_dict(self):
        return {'command': self.command, 'config': self.config, 'config_hash': self.config_hash,
                'seed': self.seed, 'tool_version': self.tool_version, 'started': self.started,
                'finished': self.finished, 'exit_code': self.exit_code, 'outputs': self.outputs}


def _now():
    return datetime.now(timezone.utc).isoformat()

def manifested(f):
    """
    Helper decorator: hand the command a RunManifest, map failures onto exit
    codes and write manifest.json into --out whatever the outcome.
    """
    def new_func(out_dir, **kwargs):
        params = {k: v for k, v in kwargs.items() if v is not None and v != ()}
        manifest = RunManifest(command=f.__name__, config=params, seed=kwargs.get('seed'), started=_now())

        try:
            code = f(manifest, out_dir, **kwargs) or EXIT_OK
        except DivergenceError as ex:
            Logger.critical('Terminating execution: {}'.format(ex))
            click.echo('Error: {}'.format(ex), err=True)
            code = EXIT_NUMERIC
        except (ValueError, OSError) as ex:
            Logger.error(str(ex))
            click.echo('Error: {}'.format(ex), err=True)
            code = EXIT_USAGE

        manifest.finished = _now()
        manifest.exit_code = code
        try:
            makedirs(out_dir, exist_ok=True)
            Json().write(manifest.to_dict(), join(out_dir, 'manifest.json'))
        except OSError as ex:
            Logger.error('Could not write manifest: {}'.format(ex))

        click.get_current_context().exit(code)

    return update_wrapper(new_func, f)

def _floats(text, name):
    try:
        values = [float(v) for v in str(text).split(',') if v.strip() != '']
    except ValueError:
        raise ValueError('{} must be comma separated numbers, got {}'.format(name, text))
    if not values:
        raise ValueError('{} needs at least one value'.format(name))

    return values

def _temperature(tau, two_tau_sq):
    if tau is not None and two_tau_sq is not None:
        raise ValueError('Give at most one of --tau and --two-tau-sq')
    if two_tau_sq is not None:
        return Temperature.from_two_tau_sq(two_tau_sq)

    return Temperature(0.71 if tau is None else tau)


@click.group()
@click.option('-v', '--verbose', is_flag=True, help='Debug logging')
@click.version_option(__version__)
def cli(verbose):
    """
    The snce cli builds stochastic-neighbor targets over codebooks, runs the
    two-Gaussian toy comparison, verifies the loss identities and benchmarks
    large-codebook target computation.

    Example Commands:

        snce codebook grid.sncb --grid=-5,5,50

        snce neighbor grid.sncb --z=-2,0 --tau 0.71

        snce toy --seeds 1,2,3 --out runs/toy

        snce verify --json
    """
    set_level(logging.DEBUG if verbose else logging.INFO)
    Logger.debug('Logging setup. Opening command line interface')


@cli.command()
@click.argument('config_path', required=False, type=click.Path(dir_okay=False))
@click.option('-o', '--out', 'out_dir', default='snce_runs/toy', help='Output directory')
@click.option('-s', '--seeds', 'seeds', help='Comma separated seeds, defaults to the config seed')
@click.option('--taus', 'taus', help='Comma separated tau grid for extra SNCE runs')
@click.option('--epsilons', 'epsilons', help='Comma separated label smoothing grid for CE+LS runs')
@click.option('--stochastic', 'stochastic', is_flag=True, help='Also train CE on tokens re-drawn from q every step')
@click.option('-t', '--threads', 'threads', type=int, help='Worker threads across runs')
@manifested
def toy(manifest, out_dir, config_path, seeds, taus, epsilons, threads, stochastic):
    """
    Train L2, CE and SNCE (optionally stochastic quantization) on the
    two-Gaussian toy and write reports
    """
    loader = ConfigLoader()
    try:
        config = loader.load(config_path or DEFAULT_PATH)
    except ConfigError as ex:
        click.echo('Config error: {}'.format(ex), err=True)
        return EXIT_USAGE
    loader.display(config)

    seed_list = parse_seeds(seeds) if seeds else [config.seed]
    tau_list = _floats(taus, '--taus') if taus else None
    eps_list = _floats(epsilons, '--epsilons') if epsilons else None

    manifest.config = {'toy': to_dict(config), 'seeds': seed_list, 'taus': tau_list, 'epsilons': eps_list,
                       'stochastic': stochastic}
    manifest.seed = seed_list[0]

    table = compare_objectives(config, seed_list, taus=tau_list, epsilons=eps_list, threads=threads,
                               stochastic=stochastic)
    manifest.outputs = write_comparison(table, out_dir)

    click.echo(table.summary().to_string(index=False))


@cli.command()
@click.argument('codebook_path', type=click.Path(exists=True, dir_okay=False))
@click.option('-z', '--z', 'z', required=True, help='Comma separated latent, e.g. --z=-2,0')
@click.option('--tau', 'tau', type=float, help='Neighbor temperature tau (default 0.71)')
@click.option('--two-tau-sq', 'two_tau_sq', type=float, help='Give the denominator 2 tau^2 directly')
@click.option('-k', '--topk', 'topk', type=int, help='Keep only the M nearest codes')
@click.option('-n', '--top-n', 'top_n', type=int, default=10, help='Number of lines to print')
@click.option('--dump', 'dump_path', help='Write every token with distance and probability to a .csv or .json file')
@click.option('-o', '--out', 'out_dir', default='snce_runs/neighbor', help='Output directory')
@manifested
def neighbor(manifest, out_dir, codebook_path, z, tau, two_tau_sq, topk, top_n, dump_path):
    """
    Print the nearest tokens of a latent with their neighbor probabilities
    """
    dump = Store.for_table(dump_path) if dump_path else None
    codebook = load_codebook(codebook_path)
    temp = _temperature(tau, two_tau_sq)
    latent = np.array(_floats(z, '--z'))

    d = distances(codebook, latent)
    if topk is None:
        tokens = np.arange(codebook.K)
        probs = np.exp(log_neighbor_distribution(codebook, latent, temp))
    else:
        q = neighbor_distribution_topk(codebook, latent, temp, topk)
        tokens, probs = q.indices, q.probs

    order = np.argsort(-probs, kind='stable')
    for rank, i in enumerate(order[:max(top_n, 0)]):
        click.echo(Json.line({'rank': rank, 'token': int(tokens[i]), 'probability': float(probs[i]),
                              'distance': float(d[tokens[i]])}))

    if dump is not None:
        table = {'token': tokens, 'distance': d[tokens], 'probability': probs}
        manifest.outputs.append(dump.write(table, dump_path))


@cli.command()
@click.option('--seed', 'seed', type=int, default=0, help='Seed for every randomized check')
@click.option('--json', 'as_json', is_flag=True, help='Print a JSON results document')
@click.option('-c', '--check', 'only', multiple=True, type=click.Choice(sorted(CHECKS)),
              help='Run only the named checks')
@click.option('-t', '--threads', 'threads', type=int, help='Worker threads for Monte Carlo trials')
@click.option('--break-gradient', 'break_gradient', is_flag=True, hidden=True)
@click.option('-o', '--out', 'out_dir', default='snce_runs/verify', help='Output directory')
@manifested
def verify(manifest, out_dir, seed, as_json, only, threads, break_gradient):
    """
    Run the property suite; exit 1 if any check fails
    """
    results = Verifier(seed=seed, break_gradient=break_gradient, threads=threads, only=only).run()
    document = Verifier.document(results, seed)

    makedirs(out_dir, exist_ok=True)
    manifest.outputs.append(Json().write(document, join(out_dir, 'results.json')))

    if as_json:
        click.echo(Json.line(document))
    else:
        click.echo(Verifier.table(results).to_string(index=False))

    failed = [r.name for r in results if not r.passed]
    if failed:
        click.echo('Failed checks: {}'.format(', '.join(failed)), err=True)
        return EXIT_VERIFY


@cli.command()
@click.option('-K', '--codebook-size', 'K', type=int, default=131072, help='Codebook size')
@click.option('-D', '--dim', 'D', type=int, default=64, help='Latent dimension')
@click.option('-L', '--latents', 'L', type=int, default=256, help='Number of latents')
@click.option('-k', '--topk', 'topk', type=int, help='Also time top-M targets')
@click.option('-t', '--threads', 'threads', type=int, help='Worker threads')
@click.option('--metric', 'metric', type=click.Choice(['l2', 'dot', 'cosine']), default='l2')
@click.option('--seed', 'seed', type=int, default=0)
@click.option('-o', '--out', 'out_dir', default='snce_runs/bench', help='Output directory')
@manifested
def bench(manifest, out_dir, K, D, L, topk, threads, metric, seed):
    """
    Time dense and top-M target computation on a random codebook
    """
    result = Benchmark(K, D, L, topk=topk, threads=threads, seed=seed, metric=Metric.parse(metric)).run()

    makedirs(out_dir, exist_ok=True)
    manifest.outputs.append(Json().write(result.to_dict(), join(out_dir, 'bench.json')))
    click.echo(Json.line(result.to_dict()))

    if not result.passed:
        click.echo('Benchmark targets failed their numeric checks', err=True)
        return EXIT_NUMERIC


@cli.command()
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--grid', 'grid', help='lo,hi,n_per_axis for a uniform 2D grid')
@click.option('--random', 'random', help='K,D for a seeded standard-normal codebook')
@click.option('--metric', 'metric', type=click.Choice(['l2', 'dot', 'cosine']), default='l2')
@click.option('--seed', 'seed', type=int, default=0)
@click.option('-o', '--out', 'out_dir', default='snce_runs/codebook', help='Output directory')
@manifested
def codebook(manifest, out_dir, path, grid, random, metric, seed):
    """
    Write a grid or random codebook file
    """
    if (grid is None) == (random is None):
        raise ValueError('Give exactly one of --grid and --random')

    if grid is not None:
        lo, hi, n = _floats(grid, '--grid')
        book = grid_codebook(lo, hi, int(n))
        if metric != 'l2':
            raise ValueError('Grid codebooks use the l2 metric')
    else:
        K, D = (int(v) for v in _floats(random, '--random'))
        book = random_codebook(K, D, Metric.parse(metric), seed)

    manifest.outputs.append(save_codebook(book, path))
    click.echo(Json.line({'path': path, 'K': book.K, 'D': book.D, 'metric': book.metric.name}))


cli.add_command(toy)
cli.add_command(neighbor)
cli.add_command(verify)
cli.add_command(bench)
cli.add_command(codebook)
