"""Post-processing plots for waveform-comparison sweep outputs."""

from .heatmap import plot_heatmap
from .study import plot_study

__version__ = "0.1.0"
