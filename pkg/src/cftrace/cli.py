"""Command-line front end: ``cftrace <command> [flags]``.

Every command writes one table, CSV (header row first) or JSON
(``{"schema_version", "command", "config", "rows"}``), to ``--output`` or
stdout. A relative ``--output`` is placed under ``$CFTRACE_OUTPUT_DIR`` when
that variable is set. ``--config FILE`` reads ``key = value`` lines using
the long flag names; flags given on the command line win.

Exit status: 0 success, 2 invalid configuration, 1 any other failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
import warnings
from itertools import product

import numpy as np

from . import __version__
from .adversary import EveProbe, eve_joint_distribution, keydist_simulate
from .bohm import bohm_estimate
from .errors import ConfigurationError, PostSelectionError, SizeError
from .metrics import WEAK_COUPLING_LIMIT, compare, single_particle_standard
from .networks import NetworkSpec, path_amplitudes, simulate
from .trace import ProbeModel

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "CFTRACE_OUTPUT_DIR"
COMMANDS = ("simulate", "trace", "standard", "compare", "sweep", "eve", "keydist", "bohm")


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cftrace", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key = value file; flags override it")
    net = ap.add_argument_group("network")
    net.add_argument("--kind")
    net.add_argument("--M", type=int)
    net.add_argument("--N", type=int)
    net.add_argument("--bit", type=int)
    net.add_argument("--elements", help="per-path overrides, e.g. 1.3:shutter,2.1:hwp")
    net.add_argument("--side-mirror-T3", dest="side_mirror_T3", type=float)
    pr = ap.add_argument_group("probe (either --epsilon or --delta with --Delta)")
    pr.add_argument("--epsilon", type=float)
    pr.add_argument("--delta", type=float)
    pr.add_argument("--Delta", type=float)
    sw = ap.add_argument_group("sweep")
    sw.add_argument("--M-list", dest="M_list", type=_int_list)
    sw.add_argument("--N-list", dest="N_list", type=_int_list)
    sw.add_argument("--epsilon-list", dest="epsilon_list", type=_float_list)
    sw.add_argument("--bits", type=_int_list, help="bits to sweep (default: --bit)")
    ev = ap.add_argument_group("eavesdropper / key distribution")
    ev.add_argument("--eve-location", dest="eve_location", help="path m.n or chain index m")
    ev.add_argument("--eve-eps", dest="eve_eps", type=float)
    ev.add_argument("--eve-mode", dest="eve_mode", choices=("projective", "weak"))
    ev.add_argument("--seed", type=int)
    ev.add_argument("--rounds", type=int)
    out = ap.add_argument_group("output")
    out.add_argument("--format", choices=("csv", "json"))
    out.add_argument("--output")
    return ap


DEFAULTS = {"M": 1, "N": 2, "bit": 0, "seed": 0, "format": "csv", "eve_mode": "projective"}


def _read_config_file(path: str, ap: argparse.ArgumentParser) -> dict:
    known = {a.dest: a for a in ap._actions if a.dest not in ("help", "version", "command", "config")}
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().lstrip("-").replace("-", "_")
            if not sep or key not in known:
                raise UsageError(f"{path}:{lineno}: unknown or malformed entry {line!r}")
            action = known[key]
            value = value.strip()
            try:
                out[key] = action.type(value) if action.type else value
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from None
            if action.choices and out[key] not in action.choices:
                raise UsageError(f"{path}:{lineno}: {key} must be one of {action.choices}")
    return out


def parse_config(argv) -> dict:
    """Merge defaults, config file and flags into one flat dict."""
    ap = _parser()
    args = ap.parse_args(argv)
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            cfg.update(_read_config_file(args.config, ap))
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
    cfg.update({k: v for k, v in vars(args).items() if v is not None and k != "config"})
    return cfg


def _probe(cfg) -> ProbeModel:
    eps, delta, Delta = cfg.get("epsilon"), cfg.get("delta"), cfg.get("Delta")
    if eps is not None and (delta is not None or Delta is not None):
        raise UsageError("give either --epsilon or --delta/--Delta, not both")
    if eps is not None:
        if not 0.0 <= eps < 1.0:
            raise UsageError(f"--epsilon must lie in [0, 1), got {eps}")
        return ProbeModel.from_epsilon(eps)
    if delta is None:
        if Delta is not None:
            raise UsageError("--Delta needs --delta")
        return ProbeModel(0.0)
    if Delta is not None and not Delta > 0:
        raise UsageError(f"--Delta must be positive, got {Delta}")
    return ProbeModel(delta, 1.0 if Delta is None else Delta)


def _spec(cfg, **over) -> NetworkSpec:
    if "kind" not in cfg and "kind" not in over:
        raise UsageError("--kind is required")
    fields = {k: cfg.get(k) for k in ("kind", "M", "N", "bit", "elements", "side_mirror_T3")}
    fields.update(over)
    return NetworkSpec.from_config({k: str(v) for k, v in fields.items() if v is not None})


def _regime_check(eps: float, M: int, N: int):
    if eps * max(M, N) > WEAK_COUPLING_LIMIT:
        warnings.warn(
            f"eps * max(M, N) = {eps * max(M, N):.3g} exceeds {WEAK_COUPLING_LIMIT}: "
            "first-order traces are outside their weak-coupling regime",
            stacklevel=2,
        )


def _base(spec: NetworkSpec) -> dict:
    return {"kind": spec.kind, "M": spec.M, "N": spec.N, "bit": spec.bit}


def cmd_simulate(cfg):
    spec, probe = _spec(cfg), _probe(cfg)
    _regime_check(probe.epsilon, spec.M, spec.N)
    probs, _ = simulate(spec, probe)
    return [
        {**_base(spec), "epsilon": probe.epsilon, "outcome": k, "probability": v}
        for k, v in probs.items()
    ]


def cmd_trace(cfg):
    spec, probe = _spec(cfg), _probe(cfg)
    table = path_amplitudes(spec)
    rows = []
    for (m, n), wv in table.weak_values().items():
        rows.append(
            {
                **_base(spec),
                "detector": table.detector,
                "m": m,
                "n": n,
                "fwd": table.fwd[(m, n)].real,
                "bwd": table.bwd[(m, n)].real,
                "weak_value_re": wv.real,
                "weak_value_im": wv.imag,
                "shift": abs(probe.delta) * abs(wv),
            }
        )
    return rows


def cmd_standard(cfg):
    probe = _probe(cfg)
    n = cfg.get("N", 1)
    if cfg.get("kind"):
        n = _spec(cfg).n_paths
    s = single_particle_standard(n, probe)
    return [dict(s.__dict__)]


def _compare_row(spec, probe):
    _regime_check(probe.epsilon, spec.M, spec.N)
    return compare(spec, probe).record()


def cmd_compare(cfg):
    return [_compare_row(_spec(cfg), _probe(cfg))]


def cmd_sweep(cfg):
    Ms = cfg.get("M_list") or [cfg["M"]]
    Ns = cfg.get("N_list") or [cfg["N"]]
    bits = cfg.get("bits") or [cfg["bit"]]
    if cfg.get("epsilon_list") is not None:
        if cfg.get("delta") is not None:
            raise UsageError("--epsilon-list cannot be combined with --delta")
        probes = [ProbeModel.from_epsilon(e) for e in cfg["epsilon_list"]]
    else:
        probes = [_probe(cfg)]
    if not (Ms and Ns and bits and probes):
        raise UsageError("sweep grids must be non-empty")
    rows = []
    for M, N, bit, probe in sorted(product(Ms, Ns, bits, probes), key=lambda g: (g[0], g[1], g[2], g[3].epsilon)):
        rows.append(_compare_row(_spec(cfg, M=M, N=N, bit=bit), probe))
    return rows


def _eve(cfg):
    loc = cfg.get("eve_location")
    if loc is None:
        return None
    mode = cfg.get("eve_mode", "projective")
    eps = cfg.get("eve_eps")
    if mode == "weak" and eps is None:
        raise UsageError("--eve-mode weak needs --eve-eps")
    return EveProbe(loc, 1.0 if eps is None else eps, mode)


def cmd_eve(cfg):
    eve = _eve(cfg)
    if eve is None:
        raise UsageError("eve needs --eve-location")
    return eve_joint_distribution(_spec(cfg), eve).rows()


def cmd_keydist(cfg):
    rounds = cfg.get("rounds")
    if rounds is None or rounds < 1:
        raise UsageError(f"--rounds must be >= 1, got {rounds}")
    return [keydist_simulate(cfg["N"], rounds, cfg["seed"], _eve(cfg)).record()]


def cmd_bohm(cfg):
    return [bohm_estimate(_spec(cfg)).record()]


HANDLERS = {
    "simulate": cmd_simulate,
    "trace": cmd_trace,
    "standard": cmd_standard,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "eve": cmd_eve,
    "keydist": cmd_keydist,
    "bohm": cmd_bohm,
}


# -- serialisation --------------------------------------------------------


def _plain(v):
    """numpy scalars to built-in types so both writers see the same values."""
    return v.item() if isinstance(v, np.generic) else v


def _check_finite(rows):
    for i, row in enumerate(rows):
        for k, v in row.items():
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"row {i}: column {k} is not finite ({v})")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".16e")
    return str(v)


def to_csv(rows) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(row.get(c)) for c in cols) + "\n")
    return buf.getvalue()


def to_json(command, cfg, rows) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": {k: v for k, v in sorted(cfg.items()) if k != "output"},
        "rows": rows,
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _destination(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    return path


def _write_atomic(path: str, text: str):
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".cftrace-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"cftrace: warning: {message}", file=sys.stderr)


def run(argv=None) -> int:
    with warnings.catch_warnings():
        warnings.showwarning = _show_warning
        return _run(argv)


def _run(argv) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"cftrace: error: {exc}", file=sys.stderr)
        return 2
    command = cfg.pop("command")
    try:
        rows = HANDLERS[command](cfg)
        rows = [{k: _plain(v) for k, v in r.items()} for r in rows]
        _check_finite(rows)
        text = to_json(command, cfg, rows) if cfg["format"] == "json" else to_csv(rows)
    except (UsageError, ConfigurationError, SizeError) as exc:
        print(f"cftrace: error: {exc}", file=sys.stderr)
        return 2
    except (PostSelectionError, ValueError, ZeroDivisionError) as exc:
        print(f"cftrace: failed: {exc}", file=sys.stderr)
        return 1
    dest = _destination(cfg.get("output"))
    if dest is None:
        sys.stdout.write(text)
    else:
        _write_atomic(dest, text)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
