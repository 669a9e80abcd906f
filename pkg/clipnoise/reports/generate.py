"""
Draw a PNG next to every clipnoise CSV in a directory.

    clipnoise-plot results/
"""

import argparse
import glob
import os
import sys
from typing import List, Optional

from clipnoise.errors import ClipNoiseError
from clipnoise.reports.charts import ChartGenerator, read_result_csv


def plot_directory(directory: str) -> List[str]:
    """Plot each result CSV in ``directory``; returns the PNG paths written."""
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"directory not found: {directory}")

    written = []
    for csv_path in sorted(glob.glob(os.path.join(directory, "*.csv"))):
        try:
            kind, _ = read_result_csv(csv_path)
        except ClipNoiseError as e:
            print(f"⚠️  Skipping {csv_path}: {e}")
            continue
        png_path = os.path.splitext(csv_path)[0] + ".png"
        if kind == "pdf":
            ChartGenerator.plot_overlay(csv_path, png_path)
        else:
            ChartGenerator.plot_sweep(csv_path, png_path)
        ChartGenerator.close_all()
        print(f"Chart saved to {png_path}")
        written.append(png_path)
    return written


def main(argv: Optional[List[str]] = None) -> None:
    parser = argparse.ArgumentParser(prog="clipnoise-plot", description="Plot clipnoise CSV results")
    parser.add_argument("directory", help="Directory holding clipnoise CSV files")
    args = parser.parse_args(argv)

    try:
        written = plot_directory(args.directory)
    except (OSError, ClipNoiseError) as e:
        print(f"❌ Error: {e}")
        sys.exit(1)
    if not written:
        print(f"No clipnoise CSV files in {args.directory}")


if __name__ == "__main__":
    main()
