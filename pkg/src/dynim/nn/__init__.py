from .dense import ShapeError, dense_backward, dense_forward
from .gradcheck import grad_check
from .losses import bce_loss, mse_loss
from .lstm import LstmParams, bilstm_backward, bilstm_forward, lstm_cell_backward, lstm_cell_forward, sigmoid
from .optim import AdamState, adam_step, sgd_step
from .sage import SageLayerParams, mean_aggregator, sage_layer_backward, sage_layer_forward

__all__ = [
    "AdamState",
    "LstmParams",
    "SageLayerParams",
    "ShapeError",
    "adam_step",
    "bce_loss",
    "bilstm_backward",
    "bilstm_forward",
    "dense_backward",
    "dense_forward",
    "grad_check",
    "lstm_cell_backward",
    "lstm_cell_forward",
    "mean_aggregator",
    "mse_loss",
    "sage_layer_backward",
    "sage_layer_forward",
    "sgd_step",
    "sigmoid",
]
