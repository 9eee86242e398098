"""Automated sperm-motility prediction from microscopy video.

Converts frame sequences into tensor representations and texture features,
trains classical and convolutional regressors (optionally fused with
participant data) on the progressive / non-progressive / immotile targets,
and evaluates them with participant-level 3-fold cross-validation.
"""

__version__ = "0.1.0"
