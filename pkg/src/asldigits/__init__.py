"""NumPy CNN stack for classifying American Sign Language digit images."""

from .augment import AugmentConfig, add_noise, augment_dataset, rotate
from .data import Dataset, RawImage, one_hot, stratified_split
from .models import (
    build_architecture,
    forward,
    init_parameters,
    load_checkpoint,
    save_checkpoint,
)
from .npy import load_dataset, parse_npy, write_npy
from .optim import accuracy, adadelta_init, adadelta_step, cross_entropy
from .training import TrainConfig, train

__version__ = "0.1.0"
