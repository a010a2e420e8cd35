# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""CSV, workbook and plot-script export for experiment and bound-sweep results."""

import io
import json
import os

from .constants import (BOUNDS_CSV, BOUNDS_VS_X_CSV, CSV_FLOAT_FORMAT, PLOT_SCRIPT_NAME,
                        RESULTS_CSV, SUMMARY_CSV, WORKBOOK_NAME)

DEFAULT_OUTPUT_DIR = 'netsim_output'


def resolve_output_dir(out_dir=None):
    """Output directory priority:
      1. explicit --out
      2. NETSIM_OUTPUT_DIR environment variable
      3. ./netsim_output
    """
    path = out_dir or os.environ.get('NETSIM_OUTPUT_DIR') or DEFAULT_OUTPUT_DIR
    os.makedirs(path, exist_ok=True)
    return path


def _write_csv(df, path):
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    return path


def write_csvs(result, out_dir):
    """results.csv, summary.csv and bounds.csv; returns the three paths."""
    return (
        _write_csv(result.runs, os.path.join(out_dir, RESULTS_CSV)),
        _write_csv(result.summary, os.path.join(out_dir, SUMMARY_CSV)),
        _write_csv(result.bounds, os.path.join(out_dir, BOUNDS_CSV)),
    )


def write_bounds_vs_x(table, out_dir):
    return _write_csv(table, os.path.join(out_dir, BOUNDS_VS_X_CSV))


def _autofit(ws):
    for col in ws.columns:
        max_length = 0
        column = col[0].column_letter
        for cell in col:
            if cell.value is not None:
                max_length = max(max_length, len(str(cell.value)))
        ws.column_dimensions[column].width = (max_length + 2) * 1.2


def _append_frame(ws, df):
    from openpyxl.styles import Font
    from openpyxl.utils.dataframe import dataframe_to_rows

    for r in dataframe_to_rows(df, index=False, header=True):
        ws.append(r)
    for cell in ws[1]:
        cell.font = Font(bold=True)
    for row in ws.iter_rows(min_row=2):
        for cell in row:
            if isinstance(cell.value, float):
                cell.number_format = '0.000'
    ws.freeze_panes = 'A2'
    _autofit(ws)


def write_workbook(result, filename):
    """Workbook with Summary, Runs, Bounds and Config sheets.

    *filename* can be a path or an ``io.BytesIO``; nothing touches the filesystem for a stream.
    """
    from openpyxl import Workbook
    from openpyxl.styles import Font

    wb = Workbook()
    ws_summary = wb.active
    ws_summary.title = 'Summary'
    _append_frame(ws_summary, result.summary)
    _append_frame(wb.create_sheet('Runs'), result.runs)
    _append_frame(wb.create_sheet('Bounds'), result.bounds)

    ws_cfg = wb.create_sheet('Config')
    ws_cfg.append(['key', 'value'])
    for cell in ws_cfg[1]:
        cell.font = Font(bold=True)
    for key, val in result.config.to_json().items():
        ws_cfg.append([key, json.dumps(val) if isinstance(val, (list, dict)) else val])
    _autofit(ws_cfg)

    if not isinstance(filename, io.BytesIO):
        parent = os.path.dirname(os.path.abspath(filename))
        os.makedirs(parent, exist_ok=True)
    wb.save(filename)
    return filename


def write_workbook_to(result, out_dir):
    return write_workbook(result, os.path.join(out_dir, WORKBOOK_NAME))


_EXPERIMENT_PLOT = '''"""Plot maximal decision time and transmissions against connectivity."""

import os

import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

HERE = os.path.dirname(os.path.abspath(__file__))

summary = pd.read_csv(os.path.join(HERE, "{summary}"))
fig = make_subplots(rows=1, cols=2, subplot_titles=("Max time (excl. init)", "Max transmissions"))
for shape, group in summary.groupby("base_shape", sort=False):
    group = group.sort_values("connectivity")
    fig.add_trace(go.Scatter(x=group["connectivity"], y=group["max_time"], mode="lines+markers",
                             name=f"{{shape}} time"), row=1, col=1)
    fig.add_trace(go.Scatter(x=group["connectivity"], y=group["max_transmissions"],
                             mode="lines+markers", name=f"{{shape}} transmissions"), row=1, col=2)
fig.update_xaxes(title_text="connectivity C")
fig.update_layout(title="Leader election over random broadcast topologies")
fig.write_html(os.path.join(HERE, "results.html"))
if os.environ.get("NETSIM_SHOW_PLOT"):
    fig.show()
'''

_BOUNDS_PLOT = '''"""Plot the time and message bounds against the growth factor X."""

import os

import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

HERE = os.path.dirname(os.path.abspath(__file__))

table = pd.read_csv(os.path.join(HERE, "{table}"))
fig = make_subplots(rows=1, cols=2, subplot_titles=("Time bound", "Message bound"))
fig.add_trace(go.Scatter(x=table["x"], y=table["time_bound"], mode="lines", name="time"),
              row=1, col=1)
fig.add_trace(go.Scatter(x=table["x"], y=table["message_bound"], mode="lines", name="closed form"),
              row=1, col=2)
fig.add_trace(go.Scatter(x=table["x"], y=table["work_message_bound"], mode="lines",
                         name="per-period accounting"), row=1, col=2)
fig.update_xaxes(title_text="growth factor X")
fig.update_layout(title="Bounds against X")
fig.write_html(os.path.join(HERE, "bounds_vs_x.html"))
if os.environ.get("NETSIM_SHOW_PLOT"):
    fig.show()
'''


def write_plot_script(out_dir, kind='experiment'):
    """Emit a standalone plotly script next to the CSVs it reads."""
    if kind == 'experiment':
        text = _EXPERIMENT_PLOT.format(summary=SUMMARY_CSV)
        name = PLOT_SCRIPT_NAME
    elif kind == 'bounds':
        text = _BOUNDS_PLOT.format(table=BOUNDS_VS_X_CSV)
        name = 'plot_bounds.py'
    else:
        raise ValueError(f"unknown plot kind '{kind}'")
    path = os.path.join(out_dir, name)
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(text)
    return path
