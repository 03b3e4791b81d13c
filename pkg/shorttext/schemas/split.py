"""
Split manifest schema
"""
from marshmallow import Schema, fields, validate


class SplitManifestSchema(Schema):
    """Seed, fractions and label table recorded next to split CSVs"""
    seed = fields.Integer(required=True)
    fractions = fields.List(fields.Float(), required=True, validate=validate.Length(equal=3))
    labels = fields.List(fields.String(), required=True)
    counts = fields.Dict(keys=fields.String(), values=fields.Integer(), required=True)
    subsample_fraction = fields.Float(load_default=None, allow_none=True)
    order = fields.String(load_default="subsample-then-split")
    source = fields.String(load_default=None, allow_none=True)
