"""User scheduling for mmWave hybrid-beamforming uplinks with low-resolution ADCs."""

__version__ = "0.1.0"
