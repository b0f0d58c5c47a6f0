"""Plotly renderings of latency sweep results."""

from pathlib import Path

import pandas as pd
import plotly.graph_objects as go

from surit.errors import EmptyInputError, InvalidInputError
from surit.utils.io import atomic_write_text

REQUIRED_COLUMNS = ("system", "alpha", "beta", "SER", "t_e/T")


def sweep_figure(frame: pd.DataFrame, title: str = "Speaker latency vs. speaker error") -> go.Figure:
    """t_e/T against SER, one marker per system, labelled with its (alpha, beta) cell."""
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise InvalidInputError(f"sweep table lacks columns: {', '.join(missing)}")
    if frame.empty:
        raise EmptyInputError("sweep table has no rows")

    fig = go.Figure()
    for prefix, group in frame.groupby(frame["system"].str[0], sort=True):
        fig.add_trace(
            go.Scatter(
                x=group["t_e/T"],
                y=group["SER"],
                mode="markers+text",
                name=f"{prefix} systems",
                text=group["system"],
                textposition="top center",
                customdata=group[["alpha", "beta"]].to_numpy(),
                hovertemplate=(
                    "%{text}<br>alpha=%{customdata[0]}, beta=%{customdata[1]}"
                    "<br>t_e/T=%{x:.3f}<br>SER=%{y:.3f}<extra></extra>"
                ),
            )
        )
    fig.update_layout(
        title=title,
        xaxis_title="mean t_e / T",
        yaxis_title="SER",
        template="plotly_white",
        legend_title="Regime",
    )
    return fig


def write_sweep_html(frame: pd.DataFrame, path: Path) -> Path:
    """Standalone HTML chart; plotly.js is loaded from the CDN."""
    html = sweep_figure(frame).to_html(full_html=True, include_plotlyjs="cdn")
    atomic_write_text(path, html)
    return path
