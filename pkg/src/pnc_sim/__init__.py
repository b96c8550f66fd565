"""Asynchronous physical-layer network coding: relay decoders and BER harness."""
from .harness import BerRecord, Scheme, SweepConfig, run_point, run_sweep
from .ra_code import RaConfig, encode
from .signal_model import ChannelParams, Constellation, Modulation, ReceivedFrame, modulate, transmit

__version__ = "0.1.0"

__all__ = ["BerRecord", "ChannelParams", "Constellation", "Modulation", "RaConfig", "ReceivedFrame",
           "Scheme", "SweepConfig", "encode", "modulate", "run_point", "run_sweep", "transmit"]
