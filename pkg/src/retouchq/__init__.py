"""Reinforcement-learned global photo color enhancement.

The package trains a Double Q-learning agent to undo color distortions with a
fixed vocabulary of twelve global edits (contrast, saturation, brightness and
three two-channel color shifts, each up/down by 5%).  Training pairs are
synthesized by randomly distorting reference photos until they sit 10-20
CIELab units away ("distort and recover"), so no hand-retouched ground truth
is required.

Typical use goes through the CLI (``retouchq distort/train/enhance/eval``);
the same operations are importable from the submodules:

    color     sRGB <-> CIELab conversion and the CIELab distance metric
    actions   the twelve edit actions
    distort   training-pair synthesis
    features  color histogram + context feature state construction
    env       the episode/reward machinery
    nn        the MLP Q-network, Adam, and checkpoint I/O
    agent     greedy enhancement with the learned stop rule
    train     replay buffer and the Double Q-learning loop
    metrics   mean CIELab error and SSIM
"""

from .actions import ACTIONS, NUM_ACTIONS, EditAction, apply_edit
from .agent import enhance
from .color import kernel_backend, lab_to_srgb, mean_lab_distance, srgb_to_lab
from .distort import TrainingPair, synthesize_pair
from .features import build_state, lab_histogram, load_context_feature, tiny_context
from .metrics import mean_l2_error, ssim
from .nn import MlpNetwork, init_network, load_checkpoint, save_checkpoint
from .train import TrainConfig, run_training

__version__ = "0.1.0"

__all__ = [
    "ACTIONS",
    "NUM_ACTIONS",
    "EditAction",
    "MlpNetwork",
    "TrainConfig",
    "TrainingPair",
    "apply_edit",
    "build_state",
    "enhance",
    "init_network",
    "kernel_backend",
    "lab_histogram",
    "lab_to_srgb",
    "load_checkpoint",
    "load_context_feature",
    "mean_l2_error",
    "mean_lab_distance",
    "run_training",
    "save_checkpoint",
    "srgb_to_lab",
    "ssim",
    "synthesize_pair",
    "tiny_context",
    "__version__",
]
