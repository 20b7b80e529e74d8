"""Batch runner: ``keylog-sim <protocol> [flags]``.

Settings come from flags and/or a ``--config`` file of ``key = value`` lines
(``#`` starts a comment); flags win. Exit codes: 0 success, 1 invalid
configuration, 2 numerical failure (truncation guard, undecodable phase).
Errors go to stderr as one JSON line ``{"code", "message", "context"}``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import register as reg
from .errors import ConfigError, IoFailure, KeylogError
from .fock import GkpParams
from .phase_algebra import PauliLetter, make_pauli
from .protocols import attack as attack_mod
from .protocols.qpe import (
    ANCILLA,
    CROSSKERR,
    EXACT,
    FOCK,
    JOINT,
    QFT,
    QpeConfig,
    QpeOutcome,
    qpe_crosskerr,
    qpe_oneshot,
    qpe_standard,
)
from .protocols.superdense import superdense_dv

PROTOCOLS = ("superdense", "qpe-standard", "qpe-oneshot", "qpe-crosskerr", "attack", "sweep")

DEFAULTS = {
    "n": 1,
    "beta": "1.2533141373155001,0",
    "alpha": None,
    "letter": "Z",
    "bits": "00",
    "theta": 0.0,
    "backend": FOCK,
    "delta": 0.25,
    "cutoff": 150,
    "s_max": None,
    "mu": 0,
    "working_cutoff": None,
    "fourier": QFT,
    "readout": ANCILLA,
    "shared_mode": False,
    "letters": "IXZY",
    "deltas": "0.25",
    "cutoffs": "150",
    "n_values": "1",
    "workers": None,
    "seed": 0,
    "output": None,
    "format": "json",
}

# which settings each protocol reads; the rest are dropped from the resolved config
USED = {
    "superdense": ("bits", "seed"),
    "qpe-standard": ("n", "theta", "seed"),
    "qpe-oneshot": ("n", "beta", "alpha", "letter", "backend", "delta", "cutoff", "s_max", "mu", "working_cutoff", "seed"),
    "qpe-crosskerr": ("n", "beta", "alpha", "letter", "backend", "delta", "cutoff", "s_max", "mu", "working_cutoff", "readout", "seed"),
    "attack": ("n", "letter", "backend", "delta", "cutoff", "s_max", "mu", "working_cutoff", "fourier", "readout", "shared_mode", "seed"),
    "sweep": ("letters", "deltas", "cutoffs", "n_values", "backend", "mu", "working_cutoff", "fourier", "readout", "shared_mode", "workers", "seed"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, prog=self.prog)


def parse_complex(text: str) -> complex:
    """``"re,im"`` -> complex."""
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError(f"complex value must be 're,im', got {text!r}", value=text)
    try:
        z = complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise ConfigError(f"complex value must be 're,im', got {text!r}", value=text) from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError(f"complex value must be finite, got {text!r}", value=text)
    return z


def read_config_file(path: str) -> dict:
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}", path=str(path)) from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno} is not key=value", path=str(path), line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS and key != "protocol":
            raise ConfigError(f"unknown config key {key!r}", path=str(path), line=lineno)
        values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="keylog-sim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"keylog-sim {__version__}")
    sub = parser.add_subparsers(dest="protocol", required=True)
    for name in PROTOCOLS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value settings file")
        p.add_argument("--output", "-o", help="result file (stdout if omitted)")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--seed", help="unsigned 64-bit seed for the sampled outcome")
        used = USED[name]
        if "bits" in used:
            p.add_argument("--bits", choices=("00", "01", "10", "11"))
        if "theta" in used:
            p.add_argument("--theta", help="phase theta in radians")
        if "n" in used:
            p.add_argument("--n")
        if "beta" in used:
            p.add_argument("--beta", help="probe displacement as 're,im'")
        if "alpha" in used:
            p.add_argument("--alpha", help="unknown displacement as 're,im' (overrides --letter)")
        if "letter" in used:
            p.add_argument("--letter")
        if "backend" in used:
            p.add_argument("--backend", choices=(EXACT, FOCK))
        if "delta" in used:
            p.add_argument("--delta", help="GKP envelope width")
            p.add_argument("--cutoff", help="GKP codeword Fock cutoff")
            p.add_argument("--s-max", dest="s_max")
        if "mu" in used:
            p.add_argument("--mu", choices=("0", "1"))
            p.add_argument("--working-cutoff", dest="working_cutoff")
        if "fourier" in used:
            p.add_argument("--fourier", choices=(QFT, CROSSKERR))
        if "readout" in used:
            p.add_argument("--readout", choices=(ANCILLA, JOINT))
        if "shared_mode" in used:
            p.add_argument("--shared-mode", dest="shared_mode", action="store_const", const="true")
        if "letters" in used:
            p.add_argument("--letters", help="e.g. IXZY")
            p.add_argument("--deltas", help="comma-separated envelope widths")
            p.add_argument("--cutoffs", help="comma-separated codeword cutoffs")
            p.add_argument("--n-values", dest="n_values", help="comma-separated register sizes")
            p.add_argument("--workers", help=f"worker processes (default ${attack_mod.THREADS_ENV} or CPU count)")
    return parser


def _int(key, value, minimum=None):
    try:
        v = int(str(value))
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}", key=key) from None
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {v}", key=key)
    return v


def _float(key, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}", key=key) from None
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite, got {value!r}", key=key)
    return v


def _bool(key, value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {value!r}", key=key)


def _letter(key, value):
    try:
        return PauliLetter.parse(str(value))
    except ValueError as exc:
        raise ConfigError(str(exc), key=key) from None


def _list(key, value, conv):
    items = [s for s in str(value).replace(" ", "").split(",") if s]
    if not items:
        raise ConfigError(f"{key} must be a non-empty list", key=key)
    return [conv(key, s) for s in items]


def _choice(key, value, options):
    if value not in options:
        raise ConfigError(f"{key} must be one of {list(options)}, got {value!r}", key=key)
    return value


def resolve(argv) -> dict:
    """Parse flags and config file into a validated, fully populated config."""
    args = build_parser().parse_args(argv)
    protocol = args.protocol
    merged = dict(DEFAULTS)
    if args.config:
        file_values = read_config_file(args.config)
        file_protocol = file_values.pop("protocol", protocol)
        if file_protocol != protocol:
            raise ConfigError(f"config file is for {file_protocol!r}, not {protocol!r}", path=args.config)
        merged.update(file_values)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            merged[key] = value

    cfg = {"protocol": protocol}
    for key in USED[protocol]:
        value = merged[key]
        if key in ("n",):
            value = _int(key, value, 1)
        elif key in ("cutoff", "mu"):
            value = _int(key, value, 0)
        elif key in ("s_max", "working_cutoff", "workers"):
            value = None if value in (None, "", "none", "auto") else _int(key, value, 0 if key == "s_max" else 1)
        elif key == "seed":
            value = _int(key, value, 0)
            if value >= 2**64:
                raise ConfigError("seed must fit in 64 bits", key=key)
        elif key in ("theta", "delta"):
            value = _float(key, value)
        elif key in ("beta", "alpha"):
            value = None if value in (None, "") else parse_complex(value)
        elif key == "letter":
            value = _letter(key, value).value
        elif key == "letters":
            value = [_letter(key, ch).value for ch in str(value).replace(",", "")]
            if not value:
                raise ConfigError("letters must be non-empty", key=key)
        elif key == "deltas":
            value = _list(key, value, _float)
        elif key == "cutoffs":
            value = _list(key, value, lambda k, s: _int(k, s, 8))
        elif key == "n_values":
            value = _list(key, value, lambda k, s: _int(k, s, 1))
        elif key == "backend":
            value = _choice(key, value, (EXACT, FOCK))
        elif key == "fourier":
            value = _choice(key, value, (QFT, CROSSKERR))
        elif key == "readout":
            value = _choice(key, value, (ANCILLA, JOINT))
        elif key == "shared_mode":
            value = _bool(key, value)
        elif key == "bits":
            value = _choice(key, str(value), ("00", "01", "10", "11"))
        cfg[key] = value
    cfg["format"] = _choice("format", merged["format"], ("json", "csv"))
    cfg["output"] = merged["output"]

    # construct the numerical configs now so invalid combinations fail with exit 1
    if "delta" in cfg:
        try:
            _qpe_config(cfg)
        except (ValueError, KeylogError) as exc:
            if isinstance(exc, KeylogError) and exc.numerical:
                raise
            raise ConfigError(str(exc), protocol=protocol) from None
    return cfg


def _gkp(cfg) -> GkpParams:
    return GkpParams(mu=cfg.get("mu", 0), delta=cfg["delta"], cutoff=cfg["cutoff"], s_max=cfg.get("s_max"))


def _qpe_config(cfg) -> QpeConfig:
    kwargs = dict(
        n=cfg["n"],
        backend=cfg["backend"],
        gkp=_gkp(cfg),
        working_cutoff=cfg.get("working_cutoff"),
        readout=cfg.get("readout", ANCILLA),
    )
    if cfg.get("beta") is not None:
        kwargs["beta"] = cfg["beta"]
    return QpeConfig(**kwargs)


# -- output ---------------------------------------------------------------------


def _clean(obj):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(f"{float(obj):.12g}")
        return 0.0 if v == 0 else v
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def distribution_csv(distribution, prefix_column: str | None = None, prefix_value=None) -> str:
    rows = []
    for k, p in enumerate(distribution):
        value = f"{max(float(p), 0.0):.12f}"
        rows.append(f"{prefix_value},{k},{value}" if prefix_column else f"{k},{value}")
    return "\n".join(rows) + "\n"


def export_distribution(outcome: QpeOutcome | np.ndarray, fmt: str, path: str | None = None) -> str:
    """Serialize an outcome distribution (``k,probability`` CSV or a JSON array)."""
    dist = outcome.distribution if isinstance(outcome, QpeOutcome) else np.asarray(outcome)
    if fmt == "csv":
        text = "k,probability\n" + distribution_csv(dist)
    elif fmt == "json":
        text = json.dumps(_clean(dist)) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        write_atomic(path, text)
    return text


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _outcome_fields(o: QpeOutcome) -> dict:
    out = {
        "distribution": o.distribution,
        "ell": o.ell,
        "delta": o.delta,
        "theta": o.theta,
        "k_top": o.k_top,
        "fourier": o.fourier,
        "readout": o.readout,
        "alpha_applications": o.alpha_applications,
    }
    if o.codeword_fidelity is not None:
        out["codeword_fidelity"] = min(o.codeword_fidelity, 1.0)
        out["mode_purity"] = min(o.mode_purity, 1.0)
        out["leakage_max"] = o.leakage_max
    return out


def _user_alpha(cfg):
    if cfg.get("alpha") is not None:
        return cfg["alpha"]
    return make_pauli(PauliLetter(cfg["letter"]))


def run(cfg: dict) -> tuple[dict, str]:
    """Execute a resolved config; returns (result section, summary line)."""
    protocol = cfg["protocol"]
    seed = cfg["seed"]
    if protocol == "superdense":
        r = superdense_dv(cfg["bits"])
        sampled = reg.sample_outcome(r.distribution, seed)
        result = {
            "bits": r.bits,
            "letter": r.letter.value,
            "raw_outcome": r.raw_outcome,
            "decoded": r.decoded,
            "distribution": r.distribution,
            "sampled_outcome": format(sampled, "02b"),
        }
        return result, f"superdense bits={r.bits} raw={r.raw_outcome} decoded={r.decoded}"
    if protocol == "qpe-standard":
        o = qpe_standard(cfg["n"], cfg["theta"])
        result = _outcome_fields(o)
        result["sampled_outcome"] = reg.sample_outcome(o.distribution, seed)
        return result, f"qpe-standard ell={o.ell} k_top={o.k_top} p_top={o.distribution[o.k_top]:.12f}"
    if protocol in ("qpe-oneshot", "qpe-crosskerr"):
        fn = qpe_oneshot if protocol == "qpe-oneshot" else qpe_crosskerr
        o = fn(_qpe_config(cfg), _user_alpha(cfg))
        result = _outcome_fields(o)
        result["sampled_outcome"] = reg.sample_outcome(o.distribution, seed)
        return result, f"{protocol} ell={o.ell} k_top={o.k_top} p_top={o.distribution[o.k_top]:.12f}"
    if protocol == "attack":
        rep = attack_mod.keystroke_attack(
            PauliLetter(cfg["letter"]),
            _qpe_config(cfg),
            crosskerr=cfg["fourier"] == CROSSKERR,
            shared_mode=cfg["shared_mode"],
        )
        result = _attack_fields(rep)
        result["sampled_outcome"] = [
            reg.sample_outcome(rep.run_real.distribution, seed),
            reg.sample_outcome(rep.run_imag.distribution, seed + 1 if seed + 1 < 2**64 else 0),
        ]
        summary = (
            f"attack letter={rep.true_letter.value} inferred={rep.inferred_letter.value} "
            f"codeword_fidelity={min(rep.codeword_fidelity, 1.0):.12f}"
        )
        return result, summary
    if protocol == "sweep":
        base = QpeConfig(
            n=1,
            backend=cfg["backend"],
            gkp=GkpParams(mu=cfg["mu"]),
            working_cutoff=cfg["working_cutoff"],
            readout=cfg["readout"],
        )
        rows = attack_mod.attack_sweep(
            [PauliLetter(x) for x in cfg["letters"]],
            cfg["deltas"],
            cfg["cutoffs"],
            cfg["n_values"],
            base=base,
            crosskerr=cfg["fourier"] == CROSSKERR,
            shared_mode=cfg["shared_mode"],
            workers=cfg["workers"],
        )
        out_rows = [_row_fields(r) for r in rows]
        correct = sum(1 for r in rows if r.report is not None and r.report.correct)
        return {"rows": out_rows}, f"sweep cells={len(rows)} correct={correct} errors={sum(r.error is not None for r in rows)}"
    raise ConfigError(f"unknown protocol {protocol!r}")


def _attack_fields(rep) -> dict:
    real = _outcome_fields(rep.run_real)
    return {
        "distribution": real["distribution"],
        "ell": real["ell"],
        "delta": real["delta"],
        "true_letter": rep.true_letter.value,
        "inferred_letter": rep.inferred_letter.value,
        "codeword_fidelity": min(rep.codeword_fidelity, 1.0),
        "leakage_max": rep.leakage_max,
        "recovered_phases": list(rep.recovered_phases),
        "alpha_applications": list(rep.alpha_applications),
        "shared_mode": rep.shared_mode,
        "runs": {"real": real, "imag": _outcome_fields(rep.run_imag)},
    }


def _row_fields(row) -> dict:
    out = {"letter": row.letter.value, "delta": row.delta, "cutoff": row.cutoff, "n": row.n}
    if row.report is not None:
        out.update(
            inferred_letter=row.report.inferred_letter.value,
            correct=row.report.correct,
            codeword_fidelity=min(row.report.codeword_fidelity, 1.0),
            leakage_max=row.report.leakage_max,
            error=None,
        )
    else:
        out.update(inferred_letter=None, correct=False, codeword_fidelity=None, leakage_max=None, error=row.error_code)
    return out


def render(cfg: dict, result: dict) -> str:
    fmt = cfg["format"]
    if fmt == "json":
        doc = {"protocol": cfg["protocol"], "config": cfg, "result": result, "version": __version__}
        return json.dumps(_clean(doc), indent=2) + "\n"
    protocol = cfg["protocol"]
    if protocol == "sweep":
        cols = ["letter", "delta", "cutoff", "n", "inferred_letter", "correct", "codeword_fidelity", "leakage_max", "error"]
        lines = [",".join(cols)]
        for row in result["rows"]:
            cells = []
            for c in cols:
                v = row[c]
                if isinstance(v, float):
                    v = f"{v:.12g}"
                cells.append("" if v is None else str(v))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    if protocol == "attack":
        return (
            "run,k,probability\n"
            + distribution_csv(result["runs"]["real"]["distribution"], "run", "real")
            + distribution_csv(result["runs"]["imag"]["distribution"], "run", "imag")
        )
    return "k,probability\n" + distribution_csv(result["distribution"])


def _emit_error(exc: KeylogError) -> None:
    payload = {"code": exc.code, "message": exc.message, "context": _clean(exc.context)}
    sys.stderr.write(json.dumps(payload) + "\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = resolve(argv)
    except KeylogError as exc:
        _emit_error(exc)
        return 2 if exc.numerical else 1
    try:
        result, summary = run(cfg)
        text = render(cfg, result)
        if cfg["output"]:
            write_atomic(cfg["output"], text)
            print(f"{summary} -> {cfg['output']}")
        else:
            sys.stdout.write(text)
    except KeylogError as exc:
        _emit_error(exc)
        return 2 if exc.numerical else 1
    except OSError as exc:
        _emit_error(IoFailure(str(exc), path=cfg.get("output")))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
