import plotly.express as px
import plotly.graph_objects as go
import pandas as pd
from pathlib import Path
from typing import Optional, Sequence

SWEEP_COMMANDS = ("steady", "linewidth")
GROUP_COLUMNS = ("curve", "gamma_perp", "P")
SWEEP_QUANTITIES = ("n", "nS", "nA", "n_nofluct", "n_semiclassical")


def _group_column(data: pd.DataFrame, exclude: Sequence[str] = ()) -> Optional[str]:
    """First column that splits the table into several curves"""
    for col in GROUP_COLUMNS:
        if col in data.columns and col not in exclude and data[col].nunique() > 1:
            return col
    return None


def create_spectrum_chart(data: pd.DataFrame, y_cols: Sequence[str], title: str,
                          x_col: str = "omega", group_col: Optional[str] = None, log_y: bool = False):
    """Create an interactive line chart of spectra against frequency"""
    fig = go.Figure()
    groups = data.groupby(group_col, sort=False) if group_col else [(None, data)]
    for key, part in groups:
        for col in y_cols:
            name = col if key is None else f"{col} ({group_col}={key:g})"
            fig.add_trace(go.Scatter(
                x=part[x_col],
                y=part[col],
                mode="lines",
                name=name,
                hovertemplate=f"<b>{name}</b><br>omega: %{{x:.4g}}<br>value: %{{y:.4g}}<extra></extra>"
            ))

    fig.update_layout(
        title=title,
        xaxis_title="omega (gamma_par units)",
        yaxis_title="spectral density",
        yaxis_type="log" if log_y else "linear",
        height=500,
        font=dict(size=12),
        legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1)
    )

    return fig


def create_sweep_chart(data: pd.DataFrame, y_cols: Sequence[str], title: str, x_col: str = "P",
                       group_col: Optional[str] = None, log_x: bool = True, log_y: bool = True):
    """Create a chart of steady-state quantities against pump"""
    id_vars = [x_col] + ([group_col] if group_col else [])
    long = data.melt(id_vars=id_vars, value_vars=list(y_cols), var_name="quantity", value_name="value")
    long = long[long["value"] > 0] if log_y else long
    fig = px.line(
        long,
        x=x_col,
        y="value",
        color="quantity",
        line_dash=group_col,
        title=title,
        markers=True,
        log_x=log_x,
        log_y=log_y
    )

    fig.update_traces(
        hovertemplate="<b>%{fullData.name}</b><br>P: %{x:.4g}<br>value: %{y:.4g}<extra></extra>"
    )

    fig.update_layout(
        xaxis_title="pump P",
        yaxis_title="value",
        height=500,
        font=dict(size=12)
    )

    return fig


def create_psd_comparison_chart(data: pd.DataFrame, title: str):
    """Monte-Carlo PSD with a 3-sigma band against the analytic spectrum, per component"""
    fig = go.Figure()
    for component, part in data.groupby("component", sort=False):
        fig.add_trace(go.Scatter(
            x=part["omega"], y=part["mc"] + 3 * part["stderr"], mode="lines",
            line=dict(width=0), showlegend=False, hoverinfo="skip"
        ))
        fig.add_trace(go.Scatter(
            x=part["omega"], y=part["mc"] - 3 * part["stderr"], mode="lines",
            line=dict(width=0), fill="tonexty", fillcolor="rgba(99,110,250,0.2)",
            name=f"{component} MC +/- 3 stderr", hoverinfo="skip"
        ))
        fig.add_trace(go.Scatter(x=part["omega"], y=part["mc"], mode="lines", name=f"{component} Monte-Carlo"))
        fig.add_trace(go.Scatter(x=part["omega"], y=part["analytic"], mode="lines",
                                 name=f"{component} analytic", line=dict(dash="dash")))

    fig.update_layout(
        title=title,
        xaxis_title="omega (gamma_par units)",
        yaxis_title="PSD",
        height=500,
        font=dict(size=12)
    )

    return fig


def create_table_chart(data: pd.DataFrame, title: str):
    """Plain table view for outputs without a frequency or pump axis"""
    cells = [[f"{v:.6g}" if isinstance(v, float) else v for v in data[col]] for col in data.columns]
    fig = go.Figure(data=[go.Table(header=dict(values=list(data.columns)), cells=dict(values=cells))])
    fig.update_layout(title=title, height=400, font=dict(size=12))
    return fig


def chart_for_table(data: pd.DataFrame, command: str, title: str):
    """Pick the chart matching a command's output table"""
    if "omega" not in data.columns and command not in SWEEP_COMMANDS:
        return create_table_chart(data, title)
    if command == "mc-validate":
        return create_psd_comparison_chart(data, title)
    if command in SWEEP_COMMANDS:
        if command == "linewidth":
            y_cols = [c for c in data.columns if c.startswith("gamma_") and c != "gamma_perp"]
        else:
            y_cols = [c for c in SWEEP_QUANTITIES if c in data.columns]
        return create_sweep_chart(data, y_cols, title, group_col=_group_column(data, exclude=("P",)))
    skip = {"omega", *GROUP_COLUMNS}
    y_cols = [c for c in data.columns if c not in skip]
    return create_spectrum_chart(data, y_cols, title, group_col=_group_column(data), log_y=command == "rf")


def save_html(fig, path: str) -> Path:
    """Write a figure to a standalone HTML file"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(str(target), include_plotlyjs="cdn", div_id="nanolaser-figure")
    return target
