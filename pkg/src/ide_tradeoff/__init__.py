"""Rate vs instantaneous-detection-error tradeoffs over IDE quantum channels."""

__version__ = "0.1.0"
