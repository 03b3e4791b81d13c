"""
Hierarchical short-text classification: transformer encoder, word- and
sentence-level LSTMs, max pooling and a softmax head
"""
import logging

from shorttext.config import ModelConfig, TrainConfig, config_by_name, get_preset
from shorttext.models import HierarchicalClassifier
from shorttext.nn import Rng

__version__ = "1.0.0"

logger = logging.getLogger(__name__)


def create_model(config=None, seed=None, preset=None):
    """Build a classifier from a ModelConfig or a named preset

    Without a ``seed`` the model is shape-only, which is all parameter
    accounting needs.
    """
    if config is None:
        config = get_preset(preset).train_config().model
    rng = Rng(seed) if seed is not None else None
    model = HierarchicalClassifier(config, rng)
    logger.debug(
        "created %s model (%s)", config.fusion.mode, "materialised" if rng is not None else "meta"
    )
    return model
