"""
Schemas package initialization
"""
from shorttext.schemas.run_config import RunConfigSchema
from shorttext.schemas.report import MetricsReportSchema, ExperimentReportSchema, ClassScoresSchema
from shorttext.schemas.split import SplitManifestSchema
