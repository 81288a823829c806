"""Design and evaluation toolkit for coarsely quantized 5G-NR LDPC decoders.

Submodules: code (5G code construction), infoquant (mutual-information
quantizer design), dde (density-evolution design engine), scheduling,
alignment, runtime (fixed-point decoder + baselines), sim (Monte Carlo
harness), paramio (parameter files), cli.
"""

__version__ = "0.1.0"
