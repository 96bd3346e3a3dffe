"""Run configuration and deterministic CSV / JSON output.

A configuration is plain text with one ``key = value`` per line, keys in
flat dotted namespaces; ``#`` starts a comment. Example::

    initial.kind = two_pi
    initial.ell1 = 8
    initial.L = 5
    initial.s0 = 1
    initial.epsilon = 0.05
    grid.n = 128
    time.t_end = 1
"""
import csv
import json
import math
import os
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .diagnostics import SERIES_COLUMNS, check_J_monotone
from .errors import InvalidParam, ParseError, ValidationError
from .flow import FlowConfig, FlowState
from .geometry import TWO_PI, RadialGrid, arclength
from .initial_data import TwoPiParams, cusp_annulus, hyperbolic_tube, make_two_pi_metric

KINDS = ("hyperbolic", "two_pi", "cusp_test")
OUTPUT_ENV = "XCF_OUTPUT_DIR"
SNAPSHOT_COLUMNS = ["r", "s", "f", "g", "h", "alpha", "beta", "gamma"]
J_TOL = 1e-6

# key -> (type, default)
KEYS = {
    "initial.kind": (str, "hyperbolic"),
    "initial.b": (float, 1.0),
    "initial.ell1": (float, 8.0),
    "initial.L": (float, 5.0),
    "initial.s0": (float, 1.0),
    "initial.kappa_prime": (float, None),
    "initial.epsilon": (float, 0.0),
    "grid.n": (int, 128),
    "time.t_end": (float, 1.0),
    "time.cfl": (float, 0.4),
    "time.snapshot_every": (float, 0.1),
    "time.max_steps": (int, 10_000_000),
    "output.dir": (str, "xcf_output"),
}


@dataclass(frozen=True)
class RunConfig:
    kind: str = "hyperbolic"
    b: float = 1.0
    ell1: float = 8.0
    L: float = 5.0
    s0: float = 1.0
    kappa_prime: Optional[float] = None
    epsilon: float = 0.0
    n: int = 128
    flow: FlowConfig = field(default_factory=FlowConfig)
    output_dir: str = "xcf_output"

    def echo(self):
        """Every key with its resolved value; parse_config(format_config(...))
        reproduces the run."""
        return {
            "initial.kind": self.kind, "initial.b": self.b, "initial.ell1": self.ell1,
            "initial.L": self.L, "initial.s0": self.s0, "initial.kappa_prime": self.kappa_prime,
            "initial.epsilon": self.epsilon, "grid.n": self.n,
            "time.t_end": self.flow.t_end, "time.cfl": self.flow.cfl,
            "time.snapshot_every": self.flow.snapshot_every, "time.max_steps": self.flow.max_steps,
            "output.dir": self.output_dir,
        }

    def grid(self):
        return RadialGrid(self.n)

    def two_pi_params(self):
        return TwoPiParams(self.ell1, self.L, self.s0, self.kappa_prime, self.epsilon)

    def build_metric(self):
        grid = self.grid()
        if self.kind == "hyperbolic":
            return hyperbolic_tube(self.b, self.s0, grid)
        if self.kind == "two_pi":
            return make_two_pi_metric(self.two_pi_params(), grid)
        # cusp collar of width s0 / 2 ending at s0
        return cusp_annulus(self.ell1, self.L, self.s0, 0.5 * self.s0, grid)

    def boundary_curvature(self):
        """Curvature scale K of the homothetic boundary data."""
        if self.kind == "two_pi":
            return self.two_pi_params().kappa() ** 2
        return 1.0

    def initial_state(self):
        if self.kind == "cusp_test":
            raise ValidationError("initial.kind = cusp_test has no core and cannot be evolved")
        return FlowState.initial(self.build_metric(), self.boundary_curvature())


def _convert(key, raw, line_no, col):
    typ = KEYS[key][0]
    if typ is str:
        return raw
    try:
        if typ is int:
            v = float(raw)
            if not v.is_integer():
                raise ValueError
            return int(v)
        v = float(raw)
    except ValueError:
        raise ParseError(f"{key}: cannot read {raw!r} as {typ.__name__}", line_no, col) from None
    if not math.isfinite(v):
        raise ParseError(f"{key}: value must be finite", line_no, col)
    return v


def parse_config(text):
    """Parse configuration text into a validated RunConfig.

    Raises ParseError (with line and column) on malformed lines, unknown or
    repeated keys and unreadable values, ValidationError when the values
    violate an invariant.
    """
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ParseError("expected 'key = value'", line_no, col)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if not key:
            raise ParseError("missing key", line_no, key_col)
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", line_no, key_col)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line_no, key_col)
        raw = value_part.strip()
        val_col = len(key_part) + 2 + len(value_part) - len(value_part.lstrip())
        if not raw:
            raise ParseError(f"{key}: missing value", line_no, val_col)
        values[key] = _convert(key, raw, line_no, val_col)
    return validate_config(values)


def validate_config(values):
    """RunConfig from a dict of dotted keys, defaults filled in."""
    unknown = sorted(set(values) - set(KEYS))
    if unknown:
        raise ValidationError(f"unknown keys: {', '.join(unknown)}")
    v = {k: values.get(k, d) for k, (_, d) in KEYS.items()}
    kind = v["initial.kind"]
    if kind not in KINDS:
        raise ValidationError(f"initial.kind must be one of {', '.join(KINDS)}, got {kind!r}")
    for key in ("initial.b", "initial.ell1", "initial.L", "initial.s0"):
        if not v[key] > 0:
            raise ValidationError(f"{key} must be positive")
    if v["initial.epsilon"] < 0:
        raise ValidationError("initial.epsilon must be >= 0")
    if v["initial.kappa_prime"] is not None and not v["initial.kappa_prime"] > 0:
        raise ValidationError("initial.kappa_prime must be positive")
    if kind == "two_pi" and TWO_PI * v["initial.s0"] >= v["initial.ell1"]:
        raise ValidationError(
            f"infeasible: 2*pi*s0 = {TWO_PI * v['initial.s0']:.6g} >= ell1 = {v['initial.ell1']:.6g}"
        )
    try:
        RadialGrid(v["grid.n"])
        flow = FlowConfig(t_end=v["time.t_end"], cfl=v["time.cfl"],
                          snapshot_every=v["time.snapshot_every"], max_steps=v["time.max_steps"])
    except InvalidParam as exc:
        raise ValidationError(str(exc)) from None
    return RunConfig(kind, v["initial.b"], v["initial.ell1"], v["initial.L"], v["initial.s0"],
                     v["initial.kappa_prime"], v["initial.epsilon"], v["grid.n"], flow,
                     v["output.dir"])


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8 text: {exc}") from None
    return parse_config(text)


def format_config(cfg):
    lines = []
    for key, value in cfg.echo().items():
        if value is not None:
            lines.append(f"{key} = {format_value(value) if isinstance(value, float) else value}")
    return "\n".join(lines) + "\n"


def resolve_output_dir(cfg):
    return Path(os.environ.get(OUTPUT_ENV) or cfg.output_dir)


# -- CSV output ---------------------------------------------------------------

def format_value(x):
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    """Write ``rows`` with a header line; returns the number of data rows."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(x) for x in row])
            count += 1
    return count


def snapshot_name(t):
    return f"snapshot_{t:.6f}.csv"


def snapshot_rows(m, c):
    s, _ = arclength(m)
    cols = (m.grid.centers, s, m.f, m.g, m.h, c.alpha, c.beta, c.gamma)
    return [list(r) for r in zip(*cols)]


def versions():
    return {"xcftorus": __version__, "numpy": np.__version__, "python": platform.python_version()}


class RunWriter:
    """Evolve sink that writes one snapshot file per call and appends to
    series.csv, flushing after each snapshot."""

    def __init__(self, out_dir, cfg):
        self.out_dir = Path(out_dir)
        self.cfg = cfg
        self.outputs = []
        self.records = []
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._series = open(self.out_dir / "series.csv", "w", newline="", encoding="utf-8")
        self._csv = csv.writer(self._series, lineterminator="\n")
        self._csv.writerow(SERIES_COLUMNS)
        self._series.flush()

    def __call__(self, state, c, record):
        name = snapshot_name(state.t)
        rows = write_csv(self.out_dir / name, SNAPSHOT_COLUMNS, snapshot_rows(state.metric, c))
        self.outputs.append({"file": name, "rows": rows})
        self._csv.writerow([format_value(x) for x in record.row()])
        self._series.flush()
        self.records.append(record)

    def close(self, status, exit_code, message=None):
        self._series.close()
        outputs = [{"file": "series.csv", "rows": len(self.records)}] + self.outputs
        return write_manifest(self.out_dir, self.cfg, outputs, status, exit_code, message)


def write_manifest(out_dir, cfg, outputs, status, exit_code, message=None):
    manifest = {
        "config_echo": cfg.echo(),
        "versions": versions(),
        "columns": {"series.csv": SERIES_COLUMNS, "snapshot": SNAPSHOT_COLUMNS},
        "outputs": outputs + [{"file": "manifest.json", "rows": None}],
        "status": status,
        "exit_code": exit_code,
    }
    if message:
        manifest["message"] = message
    path = Path(out_dir) / "manifest.json"
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def run_outcome(records):
    """(exit code, status): 0 when every bound flag holds at every snapshot
    and J never increases, 2 otherwise."""
    flags_ok = all(r.flags.all() for r in records)
    j_ok = check_J_monotone([(r.t, r.J) for r in records], J_TOL)
    if flags_ok and j_ok:
        return 0, "ok"
    bad = [] if flags_ok else ["bound flags"]
    if not j_ok:
        bad.append("J monotonicity")
    return 2, "violated: " + ", ".join(bad)

