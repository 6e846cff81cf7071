from .losses import cgl_loss, softmax, total_loss, weighted_ce
from .metrics import confusion_matrix, miou
from .model import SegModel, forward, predict
from .optim import MomentumSGD, poly_lr, sgd_step
from .toydata import ToySample, gen_toy_dataset
from .train import TrainConfig, evaluate, load_config, train

__all__ = [
    "MomentumSGD", "SegModel", "ToySample", "TrainConfig", "cgl_loss", "confusion_matrix",
    "evaluate", "forward", "gen_toy_dataset", "load_config", "miou", "poly_lr", "predict",
    "sgd_step", "softmax", "total_loss", "train", "weighted_ce",
]
