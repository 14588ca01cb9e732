"""Language-model sidecar: window scores and topic classifications.

Serves boundary score tables over HTTP and exports them to disk in the
file format the segmentation engine reads. Model identity is pure
configuration; see config.Settings.
"""

from .config import Settings, SidecarError, load_labels
from .corpus import Document, load_documents
from .models import ModelBundle, render_bin

__all__ = [
    "Document",
    "ModelBundle",
    "Settings",
    "SidecarError",
    "load_documents",
    "load_labels",
    "render_bin",
]
