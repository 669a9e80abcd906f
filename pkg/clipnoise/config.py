"""
Shared Configuration for clipnoise
==================================
Central place for all constants, defaults, and the run configuration used across modules.
"""

import json
import math
import os
from dataclasses import dataclass, fields, asdict
from typing import Any, Dict, Optional, Tuple, Union

from dotenv import load_dotenv

from clipnoise.errors import ConfigError

load_dotenv()

TOOL_NAME = "clipnoise"
TOOL_VERSION = "1.0.0"

# === SIGNAL CHAIN DEFAULTS ===
DEFAULT_N = 1024
DEFAULT_QAM = 16
DEFAULT_FRAMES = 10_000
DEFAULT_SEED = 2019
SUPPORTED_QAM = (4, 16, 64, 256)
MIN_FFT_SIZE = 4

# Relative imaginary residue allowed after a Hermitian IFFT
RESIDUE_TOLERANCE = 1e-9

# === CLIPPING ===
# Operational range for alpha1/alpha2 (bounds in units of sigma_x)
ALPHA_MIN = 0.1
ALPHA_MAX = 6.0

# === NOISE MODEL QUADRATURE ===
# Tails are integrated out to 10 * beta * sigma_x past the clipping bounds
TAIL_SPAN = 10.0
QUADRATURE_POINTS = 2**14 + 1
# ClipNoisePdf refuses 1 - beta below this
KNOT_GUARD = 1e-12

# === STATISTICS ===
DEFAULT_BINS = 200
MIN_HISTOGRAM_SAMPLES = 100
MIN_METRIC_SAMPLES = 100_000

# === SWEEP GRIDS ===
# Diagonal grid for the kurtosis study (alpha1 = alpha2)
KURTOSIS_GRID = "0.5:5:0.5"
# Lower-bound axis and upper-bound curves for the distance studies
DISTANCE_ALPHA1_GRID = "0.5:5:0.5"
DISTANCE_ALPHA2_GRID = "2,3"

# === CSV SCHEMAS ===
CSV_COLUMNS = {
    "kurtosis": ["alpha1", "alpha2", "kurtosis"],
    "hellinger": ["alpha1", "alpha2", "h_g1", "h_g2"],
    "kl": ["alpha1", "alpha2", "kl_g1", "kl_g2"],
    "pdf": ["z", "q_empirical", "g1_analytic", "g2_gaussfit"],
    "beta": ["alpha1", "alpha2", "beta_analytic", "beta_quadrature", "beta_empirical"],
}

# === PARALLELISM ===
# CLIPNOISE_THREADS caps worker processes; 0 or unset means one per CPU
THREADS_ENV = "CLIPNOISE_THREADS"


def _env_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"expected a worker count, got {raw!r}", field=THREADS_ENV)


def resolve_threads(requested: Optional[int] = None) -> int:
    """Turn a requested worker count (0 = auto) into a positive number of workers."""
    value = _env_threads() if requested is None else requested
    if value < 0:
        raise ConfigError("thread count must be >= 0", field="threads" if requested is not None else THREADS_ENV)
    if value == 0:
        return os.cpu_count() or 1
    return value


def parse_grid(text: Union[str, float, int, list, tuple], field_name: str = "alpha_grid") -> Tuple[float, ...]:
    """
    Parse a grid string into a tuple of floats.

    Accepts ``start:stop:step`` (stop included within half a step), a comma list
    such as ``2,3``, a single number, or a list of numbers.
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return (float(text),)
    if isinstance(text, (list, tuple)):
        try:
            values = tuple(float(v) for v in text)
        except (TypeError, ValueError):
            raise ConfigError(f"grid entries must be numbers, got {text!r}", field=field_name)
        if not values:
            raise ConfigError("grid is empty", field=field_name)
        return values
    if not isinstance(text, str):
        raise ConfigError(f"grid must be a string or list, got {type(text).__name__}", field=field_name)

    spec = text.strip()
    try:
        if ":" in spec:
            parts = [float(p) for p in spec.split(":")]
            if len(parts) != 3:
                raise ConfigError(f"expected start:stop:step, got {text!r}", field=field_name)
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ConfigError(f"grid {text!r} needs step > 0 and stop >= start", field=field_name)
            count = int(math.floor((stop - start) / step + 0.5)) + 1
            return tuple(round(start + i * step, 12) for i in range(count))
        values = tuple(float(p) for p in spec.split(",") if p.strip())
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}", field=field_name)
    if not values:
        raise ConfigError("grid is empty", field=field_name)
    return values


# === RUN CONFIGURATION ===
GridValue = Union[str, list, None]


@dataclass
class RunConfig:
    """
    Everything a clipnoise run needs. Keys mirror the command-line flags
    (``--alpha-grid`` <-> ``alpha_grid``).
    """

    command: Optional[str] = None
    alpha1: Optional[float] = None
    alpha2: Optional[float] = None
    alpha_grid: GridValue = None
    alpha2_grid: GridValue = None
    n: Optional[int] = None
    frames: Optional[int] = None
    samples: Optional[int] = None
    qam: Optional[int] = None
    seed: Optional[int] = None
    bins: Optional[int] = None
    out: Optional[str] = None
    threads: Optional[int] = None
    scale: Optional[float] = None

    _INT_FIELDS = ("n", "frames", "samples", "qam", "seed", "bins", "threads")
    _FLOAT_FIELDS = ("alpha1", "alpha2", "scale")
    _STR_FIELDS = ("command", "out")

    @classmethod
    def key_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line_of: Optional[Dict[str, int]] = None) -> "RunConfig":
        """
        Build a RunConfig from a flat dict, validating key names and value types.

        Args:
            data: Mapping of snake_case keys to values
            line_of: Optional key -> line number map for diagnostics
        """
        line_of = line_of or {}
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a JSON object")
        known = set(cls.key_names())
        values: Dict[str, Any] = {}
        for key, value in data.items():
            name = key.replace("-", "_")
            line = line_of.get(key)
            if name not in known:
                raise ConfigError("unknown configuration key", field=key, line=line)
            if value is None:
                values[name] = None
            elif name in cls._INT_FIELDS:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"expected an integer, got {value!r}", field=key, line=line)
                values[name] = value
            elif name in cls._FLOAT_FIELDS:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"expected a number, got {value!r}", field=key, line=line)
                values[name] = value
            elif name in cls._STR_FIELDS:
                if not isinstance(value, str):
                    raise ConfigError(f"expected a string, got {value!r}", field=key, line=line)
                values[name] = value
            else:
                if not isinstance(value, (str, list)):
                    raise ConfigError(f"expected a grid string or list, got {value!r}", field=key, line=line)
                values[name] = value
        return cls(**values)

    @classmethod
    def from_json_file(cls, path: str) -> "RunConfig":
        """Load a RunConfig from a JSON file, reporting line numbers on failure."""
        return load_config_file(path)[0]

    def to_dict(self) -> Dict[str, Any]:
        """Flat dict of the keys that are set (round-trips through from_dict)."""
        data = asdict(self)
        return {k: v for k, v in data.items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def merged(self, overrides: "RunConfig") -> "RunConfig":
        """Return a copy where every field set in ``overrides`` wins."""
        data = self.to_dict()
        data.update(overrides.to_dict())
        return RunConfig.from_dict(data)


def _key_lines(text: str) -> Dict[str, int]:
    """Map each top-level JSON key to the line where it first appears."""
    lines = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith('"'):
            key = stripped[1:].split('"', 1)[0]
            lines.setdefault(key, number)
    return lines


def load_config_file(path: str) -> Tuple[RunConfig, Dict[str, int]]:
    """
    Read a JSON config file.

    Returns:
        The RunConfig and the line of each key, keyed by field name
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror or e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON ({e.msg}, column {e.colno})", line=e.lineno)
    lines = _key_lines(text)
    config = RunConfig.from_dict(data, line_of=lines)
    return config, {key.replace("-", "_"): line for key, line in lines.items()}
