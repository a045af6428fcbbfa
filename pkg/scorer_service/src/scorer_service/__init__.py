"""HTTP inference sidecar: embeddings and cross-encoder relevance scoring."""

from .app import create_app
from .bundle import MAX_SEQUENCE_TOKENS, ModelBundle
from .finetune import TrainConfig, finetune
from .tiny import create_tiny_bundle

__version__ = "0.1.0"
