"""Command-line experiment runner.

Each subcommand reads an optional JSON config::

    {"experiment": "pip", "seed": 7, "unit": "bits", "params": {"model": "cnot", "n_env": 16}}

Flags override config fields. Curves are written as CSV with a
``.meta.json`` sidecar, scalar results as JSON. Identical configs produce
byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .branch import CentralSpinModel, central_spin_state_at
from .darwinism import (
    BranchProvider, DenseProvider, RedundancyRangeError, partial_information_plot, redundancy_from_pip,
    redundancy_of_observable,
)
from .envariance import (
    SchmidtFrame, SchmidtLocalUnitary, born_probabilities, chain_overlap_invariant, schmidt_counterswap,
    schmidt_swap, verify_envariance,
)
from .gaussian import QBMModel, discretize_ohmic_bath, qbm_partial_information, qbm_redundancy
from .info import EntropyUnit
from .models import CnotChainModel, cnot_chain_branch_state
from .qstate import DimensionCapError, PureState, haar_random_state

log = logging.getLogger("qdarwin")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_SPIN_MODEL = {
    "model": "cnot", "n_env": 16, "a": 2 ** -0.5, "b": 2 ** -0.5, "gates": None, "action": 1.0,
    "fractions": None, "samples_per_f": 64,
}
_QBM_MODEL = {
    "squeezing": 6.3e3, "quadrature": "x", "t": 4.0, "m_s": 1000.0, "omega0": 4.0, "cutoff": 16.0,
    "band_width": 0.1, "gamma0": 1 / 40, "band_mass": 1.0, "fractions": None,
}

PARAMS: dict[str, dict] = {
    "born": {"weights": ["2/3", "1/3"], "max_denominator": 2**20, "tol": 1e-6},
    "envariance": {"weights": [0.5, 0.5], "phases": [0.0, 0.0], "swap": [0, 1]},
    "pip": dict(_SPIN_MODEL),
    "redundancy": dict(_SPIN_MODEL, delta=0.1),
    "redundancy-vs-mu": {"n_env": 50, "action": 1.0, "delta": 0.1, "n_mu": 9, "draws": 8,
                         "partition": "sequential"},
    "qbm-pip": dict(_QBM_MODEL, samples_per_f=64),
    "qbm-redundancy": dict(_QBM_MODEL, delta=0.1, samples_per_f=32),
    "chain-check": {"initial": 0.5, "links": [0.9, 0.8], "residual": None},
}
STOCHASTIC = {"pip", "redundancy", "redundancy-vs-mu", "qbm-pip", "qbm-redundancy"}
DEFAULT_UNIT = {"qbm-pip": "nats", "qbm-redundancy": "nats"}
TOP_LEVEL = {"experiment", "seed", "unit", "out", "params"}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    unit: str = "bits"
    out: str | None = None

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "params": dict(self.params), "seed": self.seed,
                "unit": self.unit, "out": self.out}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "must be a JSON object")
        for key in data:
            if key not in TOP_LEVEL:
                raise ConfigError(key, "unknown field")
        if "experiment" not in data:
            raise ConfigError("experiment", "missing")
        kind = data["experiment"]
        if kind not in PARAMS:
            raise ConfigError("experiment", f"unknown experiment {kind!r}")
        cfg = cls(kind, dict(data.get("params") or {}), data.get("seed"),
                  data.get("unit", DEFAULT_UNIT.get(kind, "bits")), data.get("out"))
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON ({exc.msg})") from exc
        return cls.from_dict(data)

    def validate(self) -> None:
        schema = PARAMS[self.experiment]
        for key, value in self.params.items():
            if key not in schema:
                raise ConfigError(f"params.{key}", "unknown field")
            _check_type(f"params.{key}", value, schema[key])
        if self.unit not in ("bits", "nats"):
            raise ConfigError("unit", "must be 'bits' or 'nats'")
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0):
            raise ConfigError("seed", "must be a nonnegative integer")
        if self.experiment in STOCHASTIC and self.seed is None:
            raise ConfigError("seed", "required for stochastic experiments")

    def resolved(self) -> dict:
        merged = dict(PARAMS[self.experiment])
        merged.update(self.params)
        return merged

    def config_hash(self) -> str:
        """SHA-256 of the canonical config with defaults filled in (output path excluded)."""
        canon = {"experiment": self.experiment, "params": self.resolved(), "seed": self.seed, "unit": self.unit}
        return hashlib.sha256(json.dumps(canon, sort_keys=True).encode()).hexdigest()[:16]


def _check_type(name: str, value, default) -> None:
    if value is None or default is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, list):
        ok = isinstance(value, list)
    else:
        ok = True
    if not ok:
        raise ConfigError(name, f"expected {type(default).__name__}, got {type(value).__name__}")


def _fraction(x, name: str) -> Fraction:
    try:
        return Fraction(str(x))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(name, f"cannot parse {x!r}") from exc


def _num(x: float) -> float:
    """Round-trip-safe float for JSON (no numpy scalars, no NaN)."""
    x = float(x)
    return x if math.isfinite(x) else None


def _spin_provider(p: dict, seed: int):
    model = p["model"]
    n = int(p["n_env"])
    a, b = float(p["a"]), float(p["b"])
    if model == "cnot":
        k = n if p["gates"] is None else int(p["gates"])
        m = CnotChainModel(a, b, n, k)
        units = list(range(k)) if 0 < k < n else None
        desc = {"model": "cnot", "n_env": n, "gates": k}
        return BranchProvider(cnot_chain_branch_state(m, k), units, desc), {}
    if model == "central-spin":
        cs = CentralSpinModel.random(n, np.random.default_rng(seed), (a, b))
        t = cs.time_for_action(float(p["action"]))
        desc = {"model": "central-spin", "n_env": n, "t": t, "average_action": float(p["action"])}
        return BranchProvider(central_spin_state_at(cs, t), None, desc), {"t": t}
    if model == "haar":
        psi = haar_random_state([2] * (n + 1), seed)
        return DenseProvider(psi, descriptor={"model": "haar", "n_env": n}), {}
    raise ConfigError("params.model", f"unknown model {model!r}")


def _fractions(p: dict, n: int):
    if p.get("fractions") is not None:
        return [float(f) for f in p["fractions"]]
    return [k / n for k in range(n + 1)]


def _qbm_model(p: dict) -> QBMModel:
    bath = discretize_ohmic_bath(float(p["cutoff"]), float(p["band_width"]), float(p["gamma0"]),
                                 float(p["m_s"]), float(p["band_mass"]))
    return QBMModel(bath, float(p["m_s"]), float(p["omega0"]), float(p["squeezing"]), p["quadrature"])


def _curve_rows(curve, seed, chash):
    for f, i, e, n in curve.rows():
        yield [repr(f), repr(i), repr(e), str(n), str(seed), chash]


def run_experiment(cfg: ExperimentConfig):
    """Returns ``(primary_text, meta_dict_or_None, is_csv)``."""
    p = cfg.resolved()
    unit = EntropyUnit(cfg.unit)
    chash = cfg.config_hash()
    seed = cfg.seed
    base = {"experiment": cfg.experiment, "seed": seed, "config_hash": chash, "unit": cfg.unit,
            "version": __version__}
    kind = cfg.experiment

    if kind == "born":
        weights = [_fraction(w, "params.weights") for w in p["weights"]]
        if sum(weights) != 1 or any(w < 0 for w in weights):
            raise ConfigError("params.weights", "must be nonnegative and sum to 1")
        d = len(weights)
        if d < 2:
            raise ConfigError("params.weights", "need at least two branches")
        amps = np.zeros((d, d))
        for k, w in enumerate(weights):
            amps[k, k] = math.sqrt(w)
        psi = PureState.from_unnormalized(amps.reshape(-1), [d, d])
        res = born_probabilities(psi, (0,), float(p["tol"]), int(p["max_denominator"]))
        out = dict(base, p=[float(x) for x in res.probabilities], p_exact=[str(x) for x in res.probabilities],
                   counts=list(res.plan.counts), M=res.M, approximation_error=_num(res.approximation_error),
                   continuity=res.continuity, counted_from_state=res.counted_from_state)
        return json.dumps(out, sort_keys=True, indent=2) + "\n", None, False

    if kind == "envariance":
        w = np.array([float(x) for x in p["weights"]])
        ph = np.array([float(x) for x in p["phases"]])
        if w.size != ph.size or w.size < 2:
            raise ConfigError("params.phases", "needs one phase per weight (at least two)")
        amps = np.zeros((w.size, w.size), dtype=complex)
        amps[np.diag_indices(w.size)] = np.sqrt(w) * np.exp(-1j * ph)
        psi = PureState.from_unnormalized(amps.reshape(-1), [w.size, w.size])
        k, l = (int(x) for x in p["swap"])
        frame = SchmidtFrame.of(psi, (0,))
        back = schmidt_counterswap(schmidt_swap(psi, (0,), k, l, frame=frame), (0,), k, l, frame=frame)
        swap_v = verify_envariance(psi, SchmidtLocalUnitary.swap(k, l))
        phase_v = verify_envariance(psi, SchmidtLocalUnitary.phase(np.linspace(0.3, 1.7, w.size)))
        out = dict(base, schmidt_coefficients=[_num(c) for c in frame.coefficients],
                   swap_counterswap_fidelity=_num(psi.fidelity(back)),
                   swap_envariant=swap_v.envariant, swap_best_fidelity=_num(swap_v.fidelity),
                   phase_envariant=phase_v.envariant, phase_witness=phase_v.witness_kind)
        return json.dumps(out, sort_keys=True, indent=2) + "\n", None, False

    if kind in ("pip", "redundancy"):
        provider, extra = _spin_provider(p, seed)
        curve = partial_information_plot(provider, _fractions(p, provider.n_env), int(p["samples_per_f"]),
                                         seed, unit)
        meta = dict(base, model=curve.descriptor, system_entropy=_num(curve.system_entropy), n_env=curve.n_env,
                    samples_per_f=curve.samples_per_f, **extra)
        log.info("H(S) = %.6g %s", curve.system_entropy, cfg.unit)
        if kind == "pip":
            return _csv(["f", "I_mean", "I_stderr", "n_samples", "seed", "config_hash"],
                        _curve_rows(curve, seed, chash)), meta, True
        res = redundancy_from_pip(curve, float(p["delta"]))
        out = dict(meta, delta=res.delta, f_delta=_num(res.f_delta), R_delta=_num(res.R_delta),
                   interpolated=res.interpolated, target=_num(res.target))
        return json.dumps(out, sort_keys=True, indent=2) + "\n", None, False

    if kind == "redundancy-vs-mu":
        n, draws, n_mu = int(p["n_env"]), int(p["draws"]), int(p["n_mu"])
        mus = np.linspace(0, math.pi / 2, n_mu)
        ss = np.random.SeedSequence(seed)
        table = np.zeros((draws, n_mu))
        for d, child in enumerate(ss.spawn(draws)):
            cs = CentralSpinModel.random(n, np.random.default_rng(child))
            st = central_spin_state_at(cs, cs.time_for_action(float(p["action"])))
            for j, mu in enumerate(mus):
                table[d, j] = redundancy_of_observable(st, mu, float(p["delta"]), p["partition"], seed, unit).R_delta
        mean = table.mean(axis=0)
        err = table.std(axis=0, ddof=1) / math.sqrt(draws) if draws > 1 else np.zeros(n_mu)
        rows = ([repr(float(m)), repr(float(r)), repr(float(e)), str(draws), str(seed), chash]
                for m, r, e in zip(mus, mean, err))
        meta = dict(base, n_env=n, average_action=float(p["action"]), delta=float(p["delta"]),
                    per_draw=[[_num(x) for x in row] for row in table])
        return _csv(["mu", "R_mean", "R_stderr", "n_draws", "seed", "config_hash"], rows), meta, True

    if kind in ("qbm-pip", "qbm-redundancy"):
        model = _qbm_model(p)
        t = float(p["t"])
        meta = dict(base, n_bands=model.bath.n_bands, tau_rec=_num(model.bath.tau_rec), t=t,
                    squeezing=model.squeezing)
        log.info("tau_rec = %.6g, bands = %d", model.bath.tau_rec, model.bath.n_bands)
        if kind == "qbm-pip":
            n = model.bath.n_bands
            fr = _fractions(p, n) if p["fractions"] is not None else [k / n for k in range(1, n)]
            curve = qbm_partial_information(model, t, fr, int(p["samples_per_f"]), seed, unit)
            meta["system_entropy"] = _num(curve.system_entropy)
            return _csv(["f", "I_mean", "I_stderr", "n_samples", "seed", "config_hash"],
                        _curve_rows(curve, seed, chash)), meta, True
        fr = None if p["fractions"] is None else [float(f) for f in p["fractions"]]
        res = qbm_redundancy(model, t, float(p["delta"]), fr, int(p["samples_per_f"]), seed)
        out = dict(meta, delta=res.delta, f_delta=_num(res.f_delta), R_delta=_num(res.R_delta),
                   system_entropy_nats=_num(res.system_entropy), prediction=_num(res.prediction),
                   ratio=_num(res.ratio), interpolated=res.interpolated)
        return json.dumps(out, sort_keys=True, indent=2) + "\n", None, False

    if kind == "chain-check":
        res = chain_overlap_invariant(complex(p["initial"]), [complex(x) for x in p["links"]],
                                      None if p["residual"] is None else complex(p["residual"]))
        out = dict(base, product=_num(res.product.real), log_terms=[_num(x) for x in res.log_terms],
                   log_initial=_num(res.log_initial), implied_residual=_num(abs(res.implied_residual)),
                   consistent=res.consistent)
        return json.dumps(out, sort_keys=True, indent=2) + "\n", None, False

    raise ConfigError("experiment", f"unknown experiment {kind!r}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdarwin", description="Quantum Darwinism experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in PARAMS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", type=Path, help="JSON config file")
        sp.add_argument("--seed", type=int, help="RNG seed (required for stochastic experiments)")
        sp.add_argument("--out", help="output path (stdout if omitted)")
        sp.add_argument("--unit", choices=["bits", "nats"])
        sp.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                        help="override one params field, e.g. --set n_env=12")
        sp.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_config(args) -> ExperimentConfig:
    data = {"experiment": args.command}
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON ({exc.msg})") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config", "must be a JSON object")
        if loaded.get("experiment", args.command) != args.command:
            raise ConfigError("experiment", f"config is for {loaded['experiment']!r}, not {args.command!r}")
        data.update(loaded)
    params = dict(data.get("params") or {})
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError("--set", f"expected KEY=JSON, got {item!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    data["params"] = params
    if args.seed is not None:
        data["seed"] = args.seed
    if args.unit is not None:
        data["unit"] = args.unit
    if args.out is not None:
        data["out"] = args.out
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_config(args)
        text, meta, is_csv = run_experiment(cfg)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RedundancyRangeError, DimensionCapError, FloatingPointError, np.linalg.LinAlgError,
            ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.out is None:
        sys.stdout.write(text)
        return 0
    out = Path(cfg.out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    if meta is not None:
        side = out.with_name(out.name + ".meta.json")
        side.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    log.info("wrote %s", out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
