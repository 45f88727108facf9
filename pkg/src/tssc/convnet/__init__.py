from .checkpoint import load_model, save_model
from .estimator import ConvNetClassifier
from .layers import BatchNorm, Conv2D, Dense, Flatten, GlobalAvgPool, MaxPool, ReLU, conv2d_forward
from .network import (Sequential, TrainConfig, confusion_matrix, evaluate, image_net, series_net,
                      softmax, softmax_cross_entropy, tiny_net, train)

__all__ = [
    "BatchNorm", "Conv2D", "ConvNetClassifier", "Dense", "Flatten", "GlobalAvgPool", "MaxPool",
    "ReLU", "Sequential", "TrainConfig", "confusion_matrix", "conv2d_forward", "evaluate",
    "image_net", "load_model", "save_model", "series_net", "softmax", "softmax_cross_entropy",
    "tiny_net", "train",
]
