"""Activation adapter: pretrained vision models -> ACTF activation files."""

from . import actf
from .extract import ExtractionJob, extract, manifest_labels, resolve_model

__version__ = "0.1.0"
