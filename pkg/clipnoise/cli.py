"""
clipnoise Command Line
======================
Subcommands:
    kurtosis   Kurtosis of the clipped signal over a grid of clipping bounds
    hellinger  Hellinger distance of the noise pdf to g1 (analytic) and g2 (Gaussian fit)
    kl         KL divergence of the noise pdf to g1 and g2
    pdf        Per-bin overlay of the simulated noise pdf and both candidates
    beta       Analytic, quadrature and simulated attenuation factor
    verify     Acceptance checks, printed as Markdown

Exit status: 0 on success, 2 for bad flags, config files or I/O, 1 for
failures during computation.
"""

import argparse
import io
import os
import sys
import tempfile
from datetime import datetime
from typing import Dict, List, Optional, Tuple

from clipnoise.config import (
    ALPHA_MAX, ALPHA_MIN, DEFAULT_BINS, DEFAULT_FRAMES, DEFAULT_N, DEFAULT_QAM, DEFAULT_SEED,
    DISTANCE_ALPHA1_GRID, DISTANCE_ALPHA2_GRID, KURTOSIS_GRID, MIN_METRIC_SAMPLES,
    TOOL_NAME, TOOL_VERSION, RunConfig, load_config_file, parse_grid,
)
from clipnoise.errors import ClipNoiseError, ConfigError, InputError
from clipnoise.pipeline import experiments
from clipnoise.pipeline.experiments import SweepResult, SweepSpec, frames_for_samples

SWEEP_COMMANDS = ("kurtosis", "hellinger", "kl", "pdf", "beta")


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with run settings (flags win)")
    parser.add_argument("--out", help="Output file (stdout if omitted)")
    parser.add_argument("--threads", type=int, help="Worker processes, 0 = one per CPU")
    parser.add_argument("--quiet", action="store_true", help="No progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description="DCO-OFDM clipping noise experiments")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in SWEEP_COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--alpha1", type=float, help="Lower clipping bound (units of sigma_x)")
        p.add_argument("--alpha2", type=float, help="Upper clipping bound (units of sigma_x)")
        p.add_argument("--alpha-grid", dest="alpha_grid", help="alpha1 grid: start:stop:step or a,b,c")
        p.add_argument("--alpha2-grid", dest="alpha2_grid", help="alpha2 grid: start:stop:step or a,b,c")
        p.add_argument("--n", type=int, help=f"FFT size (default {DEFAULT_N})")
        p.add_argument("--frames", type=int, help=f"Frames per grid point (default {DEFAULT_FRAMES})")
        p.add_argument("--samples", type=int, help="Samples per grid point (rounded up to whole frames)")
        p.add_argument("--qam", type=int, help=f"QAM order (default {DEFAULT_QAM})")
        p.add_argument("--seed", type=int, help=f"Master seed (default {DEFAULT_SEED})")
        p.add_argument("--bins", type=int, help=f"Histogram bins (default {DEFAULT_BINS})")
        _add_run_options(p)

    p = sub.add_parser("verify")
    p.add_argument("--scale", type=float, help="Multiplier on Monte Carlo sample counts (default 1)")
    _add_run_options(p)
    return parser


def _flag_config(args: argparse.Namespace) -> RunConfig:
    values = {name: getattr(args, name, None) for name in RunConfig.key_names()}
    return RunConfig(**values)


# A flag for one key of a pair replaces the file's value for the other
_EXCLUSIVE_KEYS = {
    "frames": "samples",
    "samples": "frames",
    "alpha1": "alpha_grid",
    "alpha_grid": "alpha1",
    "alpha2": "alpha2_grid",
    "alpha2_grid": "alpha2",
}


def resolve_config(args: argparse.Namespace) -> Tuple[RunConfig, Dict[str, int]]:
    """
    Merge the optional config file under the command-line flags.

    Returns:
        The merged configuration and the config-file line of every key whose
        value still comes from the file
    """
    flags = _flag_config(args)
    if not args.config:
        return flags, {}
    base, lines = load_config_file(args.config)
    if base.command and base.command != args.command:
        raise ConfigError(f"config file is for '{base.command}', not '{args.command}'",
                          field="command", line=lines.get("command"))

    overridden = set(flags.to_dict())
    kept = base.to_dict()
    for key in overridden:
        kept.pop(key, None)
        kept.pop(_EXCLUSIVE_KEYS.get(key, ""), None)
    file_lines = {key: lines[key] for key in kept if key in lines}
    return RunConfig.from_dict(kept).merged(flags), file_lines


def _axis(grid, single, grid_field: str, single_field: str) -> Optional[Tuple[float, ...]]:
    if grid is not None:
        values, field_name = parse_grid(grid, grid_field), grid_field
    elif single is not None:
        values, field_name = (float(single),), single_field
    else:
        return None
    for a in values:
        if not (ALPHA_MIN <= a <= ALPHA_MAX):
            raise ConfigError(f"alpha={a} outside the operational range [{ALPHA_MIN}, {ALPHA_MAX}]",
                              field=field_name)
    return values


def build_spec(config: RunConfig) -> SweepSpec:
    """
    Turn a RunConfig into a SweepSpec.

    Axis rules: an explicit grid wins over a single value. Without any
    alpha2 setting the sweep runs on the diagonal alpha1 = alpha2 when an
    alpha1 axis was given (or always for kurtosis), and otherwise uses the
    default distance grids.

    Raises:
        ConfigError: Any invalid or contradictory setting, naming the key
    """
    command = config.command
    n = config.n if config.n is not None else DEFAULT_N
    frames_field = "samples" if config.samples is not None else "frames"

    if config.frames is not None and config.samples is not None:
        raise ConfigError("set either frames or samples, not both", field="samples")
    try:
        frames = frames_for_samples(config.samples, n) if config.samples is not None else (
            config.frames if config.frames is not None else DEFAULT_FRAMES
        )
    except InputError as e:
        raise ConfigError(str(e), field="samples")

    alpha1_axis = _axis(config.alpha_grid, config.alpha1, "alpha_grid", "alpha1")
    alpha2_axis = _axis(config.alpha2_grid, config.alpha2, "alpha2_grid", "alpha2")

    if command == "pdf":
        if config.alpha1 is None or config.alpha2 is None:
            raise ConfigError("pdf needs --alpha1 and --alpha2", field="alpha1" if config.alpha1 is None else "alpha2")
        alpha1_axis = _axis(None, config.alpha1, "alpha_grid", "alpha1")
        alpha2_axis = _axis(None, config.alpha2, "alpha2_grid", "alpha2")

    diagonal = False
    if alpha2_axis is None:
        if command == "kurtosis":
            alpha1_axis = alpha1_axis or parse_grid(KURTOSIS_GRID)
            diagonal = True
        elif alpha1_axis is not None:
            diagonal = True
        else:
            alpha1_axis = parse_grid(DISTANCE_ALPHA1_GRID)
            alpha2_axis = parse_grid(DISTANCE_ALPHA2_GRID, "alpha2_grid")
    elif alpha1_axis is None:
        alpha1_axis = parse_grid(KURTOSIS_GRID if command == "kurtosis" else DISTANCE_ALPHA1_GRID)

    try:
        spec = SweepSpec(
            alpha1_grid=alpha1_axis,
            alpha2_grid=() if diagonal else alpha2_axis,
            n=n,
            frames=frames,
            qam=config.qam if config.qam is not None else DEFAULT_QAM,
            seed=config.seed if config.seed is not None else DEFAULT_SEED,
            bins=config.bins if config.bins is not None else DEFAULT_BINS,
            diagonal=diagonal,
        )
    except ConfigError:
        raise
    except InputError as e:
        raise ConfigError(str(e), field=frames_field if e.field == "frames" else e.field)
    if command in ("hellinger", "kl"):
        try:
            spec.require_samples(MIN_METRIC_SAMPLES)
        except InputError as e:
            raise ConfigError(str(e), field=frames_field)
    return spec


def _at_file_line(error: ConfigError, file_lines: Dict[str, int]) -> ConfigError:
    """Attach the config-file line to an error about a key read from the file."""
    if error.line is not None or error.field not in file_lines:
        return error
    return ConfigError(error.message, field=error.field, line=file_lines[error.field])


def effective_config(command: str, spec: SweepSpec) -> RunConfig:
    """The fully resolved settings of a run, loadable again with --config."""
    config = RunConfig(command=command, n=spec.n, frames=spec.frames, qam=spec.qam, seed=spec.seed, bins=spec.bins)
    if command == "pdf":
        config.alpha1, config.alpha2 = spec.alpha1_grid[0], spec.alpha2_grid[0]
    else:
        config.alpha_grid = list(spec.alpha1_grid)
        if not spec.diagonal:
            config.alpha2_grid = list(spec.alpha2_grid)
    return config


def execute(command: str, spec: SweepSpec, threads: Optional[int], quiet: bool) -> SweepResult:
    if command == "kurtosis":
        return experiments.kurtosis_sweep(spec, threads=threads, quiet=quiet)
    if command in ("hellinger", "kl"):
        return experiments.distance_sweep(spec, command, threads=threads, quiet=quiet)
    if command == "pdf":
        return experiments.pdf_overlay(spec.alpha1_grid[0], spec.alpha2_grid[0], spec, quiet=quiet)
    return experiments.beta_table(spec, threads=threads, quiet=quiet)


def render_csv(result: SweepResult, config: RunConfig) -> str:
    """CSV text: '#' header lines, then the column header and one line per row."""
    meta = result.metadata
    lines = [
        f"# {TOOL_NAME} {TOOL_VERSION}",
        f"# command: {result.kind}",
        f"# config: {config.to_json()}",
        f"# seed: {meta['seed']}",
        f"# samples_per_point: {meta['samples_per_point']}",
    ]
    for key in ("beta", "mu_ez", "sigma_ez", "bin_width"):
        if key in meta:
            lines.append(f"# {key}: {meta[key]!r}")
    flagged = meta.get("flagged") or []
    if flagged:
        for row in flagged:
            lines.append(f"# flagged: alpha1={row['alpha1']!r} alpha2={row['alpha2']!r} {row['reason']}")
    else:
        lines.append("# flagged: none")
    lines.append(f"# generated_at: {meta['generated_at']}")

    buffer = io.StringIO()
    result.rows.to_csv(buffer, index=False, float_format="%.10g", lineterminator="\n")
    return "\n".join(lines) + "\n" + buffer.getvalue()


def write_atomic(text: str, path: str) -> None:
    """Write through a temp file in the target directory, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix=".clipnoise-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def write_result(result: SweepResult, config: RunConfig, out: Optional[str]) -> None:
    text = render_csv(result, config)
    if out:
        write_atomic(text, out)
    else:
        sys.stdout.write(text)


def _run_verify(config: RunConfig, quiet: bool) -> int:
    from clipnoise.pipeline.summarize import render_markdown
    from clipnoise.pipeline.verify import failed_checks, run_checks, write_report

    scale = config.scale if config.scale is not None else 1.0
    if not scale > 0:
        raise ConfigError(f"scale must be positive, got {scale}", field="scale")
    report = run_checks(scale=scale, quiet=quiet)
    if config.out:
        write_report(report, config.out)
        if not quiet:
            print(f"\n📝 Report saved to {config.out}", file=sys.stderr)
    print(render_markdown(report))
    return 1 if failed_checks(report) else 0


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    quiet = args.quiet
    file_lines: Dict[str, int] = {}
    try:
        config, file_lines = resolve_config(args)
        if args.command == "verify":
            return _run_verify(config, quiet)

        spec = build_spec(config)
        started = datetime.now()
        result = execute(args.command, spec, config.threads, quiet)
        write_result(result, effective_config(args.command, spec), config.out)
        if not quiet:
            elapsed = (datetime.now() - started).total_seconds()
            target = config.out or "stdout"
            print(f"✅ {len(result.rows)} rows written to {target} in {elapsed:.1f}s", file=sys.stderr)
        return 0
    except ConfigError as e:
        print(f"❌ Error: {_at_file_line(e, file_lines)}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 2
    except ClipNoiseError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 1
    except (ArithmeticError, ValueError, MemoryError) as e:
        print(f"❌ Error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
