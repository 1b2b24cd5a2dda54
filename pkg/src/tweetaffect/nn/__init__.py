"""Small numpy neural stack: layers, losses, Adam, gradient checking, checkpoints."""

from .checkpoint import CheckpointError, load_checkpoint, read_manifest, save_checkpoint
from .gradcheck import GradCheckReport, gradient_check
from .layers import LSTM, Dense, Dropout, Embedding, GlobalMaxPool1D, lstm_cell_step, sigmoid
from .losses import loss, loss_from_logits, softmax
from .network import Network, NumericalError, sub_rng
from .optim import Adam, train_epoch

__all__ = [
    "Adam",
    "CheckpointError",
    "Dense",
    "Dropout",
    "Embedding",
    "GlobalMaxPool1D",
    "GradCheckReport",
    "LSTM",
    "Network",
    "NumericalError",
    "gradient_check",
    "load_checkpoint",
    "loss",
    "loss_from_logits",
    "lstm_cell_step",
    "read_manifest",
    "save_checkpoint",
    "sigmoid",
    "softmax",
    "sub_rng",
    "train_epoch",
]
