"""
Tests for the plotly charts behind --html
"""

import numpy as np
import pandas as pd

from visualizer import chart_for_table, create_psd_comparison_chart, save_html


def spectrum_frame():
    omega = np.linspace(-10.0, 10.0, 21)
    frames = [pd.DataFrame({"P": P, "omega": omega, "full": 1.0 / (P + omega ** 2), "nofluct": 0.5 / (P + omega ** 2)})
              for P in (2.0, 8.0)]
    return pd.concat(frames, ignore_index=True)


def test_spectrum_chart_one_trace_per_curve_and_column():
    fig = chart_for_table(spectrum_frame(), "spectrum", "spectra")
    assert len(fig.data) == 4
    assert fig.data[0].name == "full (P=2)"


def test_sweep_chart_skips_nonpositive_values_on_log_axes():
    df = pd.DataFrame({"gamma_perp": 50.0, "P": [0.0, 1.0, 10.0], "n": [0.0, 0.3, 5.0], "nS": [0.25, 0.3, 0.4]})
    fig = chart_for_table(df, "steady", "steady")
    assert {trace.name for trace in fig.data} == {"n", "nS"}
    n_trace = next(trace for trace in fig.data if trace.name == "n")
    assert list(n_trace.x) == [1.0, 10.0]


def test_psd_chart_draws_band_and_both_spectra():
    df = pd.DataFrame({"component": ["a_A"] * 3 + ["a_S"] * 3, "omega": [0.0, 1.0, 2.0] * 2,
                       "mc": [1.0, 0.5, 0.2] * 2, "stderr": [0.1] * 6, "analytic": [1.0, 0.5, 0.2] * 2})
    assert len(create_psd_comparison_chart(df, "mc").data) == 8


def test_table_chart_for_plain_tables():
    df = pd.DataFrame({"id": ["fig2a"], "pumps": [5]})
    fig = chart_for_table(df, "presets", "presets")
    assert fig.data[0].type == "table"


def test_save_html(tmp_path):
    target = save_html(chart_for_table(spectrum_frame(), "spectrum", "spectra"), str(tmp_path / "sub" / "chart.html"))
    assert target.exists()
    assert 'id="nanolaser-figure"' in target.read_text()


if __name__ == "__main__":
    print("🧪 Testing charts")
    test_spectrum_chart_one_trace_per_curve_and_column()
    print("✅ Chart checks passed")
