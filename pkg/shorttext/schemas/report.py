"""
Report schemas for serialization
"""
from marshmallow import Schema, fields, validate


class ClassScoresSchema(Schema):
    """Precision, recall and F-beta of one class"""
    p = fields.Float(required=True)
    r = fields.Float(required=True)
    f = fields.Float(required=True)
    support = fields.Integer(required=True)


class MetricsReportSchema(Schema):
    """Weighted metrics document written by ``evaluate``"""
    precision_weighted = fields.Float(required=True, validate=validate.Range(min=0, max=1))
    recall_weighted = fields.Float(required=True, validate=validate.Range(min=0, max=1))
    f1_weighted = fields.Float(required=True, validate=validate.Range(min=0, max=1))
    accuracy = fields.Float(required=True, validate=validate.Range(min=0, max=1))
    beta = fields.Float(load_default=1.0)
    per_class = fields.Dict(keys=fields.String(), values=fields.Nested(ClassScoresSchema), required=True)
    confusion = fields.List(fields.List(fields.Integer()))


class ExperimentReportSchema(Schema):
    """One Table-1-style row"""
    precision = fields.Float(required=True)
    recall = fields.Float(required=True)
    f1 = fields.Float(required=True)
    time_seconds = fields.Float(required=True, validate=validate.Range(min=0))
    total_params = fields.Integer(required=True, validate=validate.Range(min=0))
    trainable_params = fields.Integer(required=True, validate=validate.Range(min=0))
    epochs = fields.Integer(required=True, validate=validate.Range(min=0))
    size_bytes = fields.Integer(required=True, validate=validate.Range(min=0))
