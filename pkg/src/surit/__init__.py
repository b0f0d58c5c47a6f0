"""SURIT - streaming unmixing, recognition and identification transducer."""

__version__ = "0.1.0"
