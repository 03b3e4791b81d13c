"""
RunConfigFile schema for validation
"""
from marshmallow import RAISE, Schema, ValidationError, fields, validate

from shorttext.config import DIRECTIONS, LOSS_PREFACTORS, MODES
from shorttext.errors import ConfigError


class RunConfigSchema(Schema):
    """Every key a RunConfigFile may set; all optional, unknown keys rejected"""

    class Meta:
        unknown = RAISE

    learning_rate = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    batch_size = fields.Integer(validate=validate.Range(min=1))
    max_epochs = fields.Integer(validate=validate.Range(min=1))
    patience = fields.Integer(validate=validate.Range(min=1))
    seed = fields.Integer(validate=validate.Range(min=0))
    clip_norm = fields.Float(validate=validate.Range(min=0))
    max_len = fields.Integer(validate=validate.Range(min=3))
    vocab_max_size = fields.Integer(validate=validate.Range(min=4))
    vocab_min_freq = fields.Integer(validate=validate.Range(min=1))

    num_layers = fields.Integer(validate=validate.Range(min=0))
    hidden = fields.Integer(validate=validate.Range(min=1))
    heads = fields.Integer(validate=validate.Range(min=1))
    ff_width = fields.Integer(validate=validate.Range(min=1))
    vocab_size = fields.Integer(validate=validate.Range(min=4))
    max_positions = fields.Integer(validate=validate.Range(min=3))
    num_segments = fields.Integer(validate=validate.Range(min=1))
    freeze_below = fields.Integer(validate=validate.Range(min=0))
    segment_embeddings = fields.Boolean()

    lam = fields.Float(validate=validate.Range(min=0, max=1))
    mode = fields.String(validate=validate.OneOf(MODES))
    word_direction = fields.String(validate=validate.OneOf(DIRECTIONS))
    sentence_direction = fields.String(validate=validate.OneOf(DIRECTIONS))
    bidirectional = fields.Boolean()

    word_hidden = fields.Integer(validate=validate.Range(min=1))
    sentence_hidden = fields.Integer(validate=validate.Range(min=1))
    num_labels = fields.Integer(validate=validate.Range(min=1))
    head_hidden = fields.Integer(validate=validate.Range(min=0))
    phi = fields.Float(validate=validate.Range(min=0))
    loss_prefactor = fields.String(validate=validate.OneOf(LOSS_PREFACTORS))

    def load_flat(self, raw):
        """Validate raw string values, reporting every bad key by name"""
        try:
            return self.load(raw)
        except ValidationError as e:
            messages = e.normalized_messages()
            unknown = sorted(k for k, v in messages.items() if "Unknown field." in v)
            invalid = sorted(k for k in messages if k not in unknown)
            parts = []
            if unknown:
                parts.append(f"unknown keys: {', '.join(unknown)}")
            if invalid:
                parts.append(f"invalid values for: {', '.join(invalid)}")
            raise ConfigError("; ".join(parts), messages) from e
