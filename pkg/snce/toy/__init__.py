""" Two-Gaussian toy: grid quantization, a constant-input MLP and the objectives it compares """

from snce.config import GridSpec, MixtureSpec, Objective, ToyConfig
from .mixture import discretized_truth, grid_quantize_points, sample_mixture
from .mlp import MlpModel
from .trainer import DivergenceError, ToyRunReport, ToyTrainer, gradient_check_mlp, toy_metrics, train_toy
from .experiment import ComparisonTable, compare_objectives, write_comparison
