"""Charts for sweep and training outputs."""

from surit.visualization.plots import sweep_figure, write_sweep_html

__all__ = ["sweep_figure", "write_sweep_html"]
