"""
Chart Generator Module

Plots clipnoise CSV output: sweep curves (one line per alpha2) and pdf overlays.
"""

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from clipnoise.config import CSV_COLUMNS
from clipnoise.errors import InputError
from clipnoise.model.clipper import ClipConfig, clipped_signal_moments

METRIC_LABELS: Dict[str, str] = {
    "kurtosis": "Kurtosis of $x_c$",
    "h_g1": "H(q, g1)",
    "h_g2": "H(q, g2)",
    "kl_g1": "KL(q || g1)",
    "kl_g2": "KL(q || g2)",
    "beta_analytic": "β analytic",
    "beta_quadrature": "β quadrature",
    "beta_empirical": "β simulated",
}


def read_result_csv(path: str) -> Tuple[str, pd.DataFrame]:
    """Return (command, rows) of a clipnoise CSV, reading the command from its '#' header."""
    kind = None
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            if line.startswith("# command:"):
                kind = line.split(":", 1)[1].strip()
    if kind not in CSV_COLUMNS:
        raise InputError(f"{path} is not a clipnoise result file")
    rows = pd.read_csv(path, comment="#")
    if list(rows.columns) != CSV_COLUMNS[kind]:
        raise InputError(f"{path}: columns {list(rows.columns)} do not match the {kind} schema")
    return kind, rows


class ChartGenerator:
    """
    Figures for the clipping-noise studies.

    Supports:
    - Metric vs alpha1 sweeps, one curve per alpha2 (kurtosis, hellinger, kl, beta)
    - Noise pdf overlays of the histogram and both candidate models
    """

    @staticmethod
    def set_chart_style():
        """Set consistent chart styling."""
        plt.style.use('seaborn-v0_8-darkgrid')
        plt.rcParams['figure.figsize'] = (10, 6)
        plt.rcParams['font.size'] = 10
        plt.rcParams['axes.titlesize'] = 14
        plt.rcParams['axes.labelsize'] = 12

    @staticmethod
    def _curves(rows: pd.DataFrame) -> List[Tuple[str, pd.DataFrame]]:
        if bool((rows["alpha1"] == rows["alpha2"]).all()) and rows["alpha2"].nunique() > 1:
            return [("α1 = α2", rows)]
        return [(f"α2 = {a2:g}", group) for a2, group in rows.groupby("alpha2", sort=True)]

    @staticmethod
    def plot_sweep(csv_path: str, png_path: str) -> plt.Figure:
        """Metric columns against alpha1, one line per alpha2 value."""
        kind, rows = read_result_csv(csv_path)
        if kind == "pdf":
            raise InputError("pdf overlays are drawn with plot_overlay")
        ChartGenerator.set_chart_style()
        metrics = CSV_COLUMNS[kind][2:]
        fig, ax = plt.subplots()

        for label, group in ChartGenerator._curves(rows):
            group = group.sort_values("alpha1")
            for metric in metrics:
                name = METRIC_LABELS[metric] if len(metrics) > 1 else None
                ax.plot(group["alpha1"], group[metric], marker="o", linewidth=1.5,
                        label=f"{name}, {label}" if name else label)

            if kind == "kurtosis":
                analytic = [clipped_signal_moments(ClipConfig(a1, a2))[2]
                            for a1, a2 in zip(group["alpha1"], group["alpha2"])]
                ax.plot(group["alpha1"], analytic, linestyle="--", color="gray", linewidth=1)

        if kind == "kurtosis":
            ax.axhline(3.0, color="black", linestyle=":", linewidth=1, label="Gaussian (3)")
        ax.set_xlabel("α1 (lower clipping bound / σx)", fontweight='bold')
        ax.set_ylabel(METRIC_LABELS[metrics[0]] if len(metrics) == 1 else kind.upper(), fontweight='bold')
        ax.set_title(f"{kind.capitalize()} vs clipping bounds", fontweight='bold')
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(png_path, dpi=150)
        return fig

    @staticmethod
    def plot_overlay(csv_path: str, png_path: str) -> plt.Figure:
        """Histogram density and both candidates against z, linear and log scale."""
        kind, rows = read_result_csv(csv_path)
        if kind != "pdf":
            raise InputError(f"{csv_path} holds a {kind} sweep, not a pdf overlay")
        ChartGenerator.set_chart_style()
        fig, axes = plt.subplots(1, 2, figsize=(14, 5))

        for ax, log_scale in zip(axes, (False, True)):
            ax.step(rows["z"], rows["q_empirical"], where="mid", color="black", linewidth=1, label="q(z) simulated")
            ax.plot(rows["z"], rows["g1_analytic"], color="#e74c3c", linewidth=1.5, label="g1(z) analytic")
            ax.plot(rows["z"], rows["g2_gaussfit"], color="#3498db", linestyle="--", linewidth=1.5,
                    label="g2(z) Gaussian fit")
            if log_scale:
                positive = rows["q_empirical"][rows["q_empirical"] > 0]
                ax.set_yscale("log")
                ax.set_ylim(bottom=max(float(np.min(positive)) / 10, 1e-12))
            ax.set_xlabel("z")
            ax.set_ylabel("density")
            ax.legend(fontsize=8)

        axes[0].set_title("Clipping noise pdf", fontweight='bold')
        axes[1].set_title("Clipping noise pdf (log scale)", fontweight='bold')
        fig.tight_layout()
        fig.savefig(png_path, dpi=150)
        return fig

    @staticmethod
    def close_all():
        """Close all matplotlib figures."""
        plt.close('all')


def plot_sweep(csv_path: str, png_path: str) -> plt.Figure:
    return ChartGenerator.plot_sweep(csv_path, png_path)


def plot_overlay(csv_path: str, png_path: str) -> plt.Figure:
    return ChartGenerator.plot_overlay(csv_path, png_path)
