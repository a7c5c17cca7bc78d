""" Gaussian-mixture data and its discretization on the grid codebook """

import numpy as np
from scipy.stats import norm

from snce.codebook import grid_axis
from snce.process.seeding import generator, DATA


def sample_mixture(spec, n, seed, return_components=False):
    """
    i.i.d. draws: component by weight, then an isotropic Gaussian around its
    center (numpy ziggurat normals)
    """
    if int(n) != n or n < 1:
        raise ValueError('n must be a positive integer, got {}'.format(n))

    rng = generator(seed, DATA)
    centers = np.asarray(spec.centers, dtype=np.float64)
    components = rng.choice(len(centers), size=int(n), p=np.asarray(spec.weights))
    points = centers[components] + np.sqrt(spec.variance) * rng.standard_normal((int(n), 2))

    return (points, components) if return_components else points

def cell_edges(grid):
    """
    Voronoi cell boundaries of the grid axis, clipped to [lo, hi]
    """
    axis = grid_axis(grid.lo, grid.hi, grid.n_per_axis)
    return np.concatenate([[grid.lo], (axis[1:] + axis[:-1]) / 2.0, [grid.hi]])

def _cell_mass(edges, loc, scale):
    a, b = edges[:-1], edges[1:]
    # upper tail through the survival function keeps precision away from loc
    return np.where(a >= loc,
                    norm.sf(a, loc=loc, scale=scale) - norm.sf(b, loc=loc, scale=scale),
                    norm.cdf(b, loc=loc, scale=scale) - norm.cdf(a, loc=loc, scale=scale))

def discretized_truth(spec, grid):
    """
    P(quantize(Z) = k) for Z ~ mixture, integrated cell by cell and
    renormalized over [lo, hi]^2, in grid order (x fastest)
    """
    edges = cell_edges(grid)
    scale = np.sqrt(spec.variance)

    mass = np.zeros((grid.n_per_axis, grid.n_per_axis))
    for (cx, cy), weight in zip(spec.centers, spec.weights):
        mass += weight * np.outer(_cell_mass(edges, cy, scale), _cell_mass(edges, cx, scale))

    total = mass.sum()
    if not total > 0:
        raise ValueError('The mixture puts no mass inside the grid')

    return (mass / total).ravel()

def grid_quantize_points(grid, points):
    """
    Nearest grid token per point, axis by axis. Equals the exhaustive
    argmin over the grid codebook away from exact cell boundaries.
    """
    # the codebook stores float32 codes
    axis = grid_axis(grid.lo, grid.hi, grid.n_per_axis).astype(np.float32).astype(np.float64)
    midpoints = (axis[1:] + axis[:-1]) / 2.0

    points = np.asarray(points, dtype=np.float64)
    ix = np.searchsorted(midpoints, points[:, 0], side='left')
    iy = np.searchsorted(midpoints, points[:, 1], side='left')

    return iy * grid.n_per_axis + ix
