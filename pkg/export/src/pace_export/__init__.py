"""Exporter from scikit-learn tree models to the pace JSON schema."""

from .exporter import (ExportError, ExportManifest, export_ensemble,
                       export_iforest, roundtrip_check)

__all__ = ["ExportError", "ExportManifest", "export_ensemble",
           "export_iforest", "roundtrip_check"]

__version__ = "0.1.0"
