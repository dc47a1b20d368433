"""
Training pipeline: datasets, batch sampling, Adam and the training loop.
"""

from src.services.training.dataset import ImageDataset
from src.services.training.optimizer import AdamState, adam_step, learning_rate
from src.services.training.sampler import SamplerStreams, TrainingBatch, sample_batch
from src.services.training.trainer import LossHistory, Trainer, TrainResult, train

__all__ = [
    "AdamState",
    "ImageDataset",
    "LossHistory",
    "SamplerStreams",
    "TrainResult",
    "Trainer",
    "TrainingBatch",
    "adam_step",
    "learning_rate",
    "sample_batch",
    "train",
]
