"""fairbeam: alpha-fair hybrid precoding simulator for mmWave massive MIMO."""

__version__ = "0.1.0"
