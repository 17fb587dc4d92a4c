"""Encoder sidecar: turns a dataset manifest plus a pretrained audio encoder
into AEMB v1 segment-embedding files consumable by the audit toolkit."""

__version__ = "0.1.0"

from .extract import ExtractionJob, extract

__all__ = ["ExtractionJob", "extract", "__version__"]
