"""Command-line front end.

    sparsetf generate  --output DIR [--generator example1|cable] [--seed N]
    sparsetf decompose (--input FILE | --generator NAME) --output DIR [--mode M]
    sparsetf cable     (--input FILE | --generator cable) --output DIR

Settings come from built-in defaults, then ``--config FILE`` (flat
``key = value`` lines), then explicit flags.  Exit status is 0 on success,
2 for bad input or configuration and 3 when the solver does not converge;
in the last case the partial result is still written.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import io
from .cable import CableSpec, harmonic_fuse, synthetic_cable
from .driver import DriverConfig, decompose
from .errors import ComponentCapReached, NoConvergence, SparseTFError
from .gauss_newton import MODES, GnConfig
from .group_sparse import AlmConfig
from .model import DecompositionResult, ImfComponent
from .synthetic import chirp_frequency, chirp_phase, generate_example1

GENERATORS = ("example1", "cable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsetf", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--output", help="output directory")
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--seed", type=int, help="seed for synthetic generators")
        p.add_argument("--generator", choices=GENERATORS, help="synthesize the input")

    p = sub.add_parser("decompose", help="extract components from an ensemble")
    common(p)
    p.add_argument("--input", help="CSV or JSON signal file")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--max-components", type=int, dest="max_components")
    p.add_argument("--tol", type=float, help="relative residual tolerance")

    p = sub.add_parser("generate", help="write a synthetic ensemble to signals.csv")
    common(p)

    p = sub.add_parser("cable", help="fuse harmonic modes into a tension estimate")
    common(p)
    p.add_argument("--input", help="CSV or JSON signal file")
    p.add_argument("--mode", choices=MODES)
    return parser


def resolve_config(args: argparse.Namespace) -> io.RunConfig:
    overrides = io.read_config(args.config) if args.config else {}
    names = {f.name for f in fields(io.RunConfig)}
    for key, value in vars(args).items():
        if key in names and value is not None:
            overrides[key] = value
    cfg = io.RunConfig(**overrides)
    if cfg.mode not in MODES:
        raise io.ConfigError(f"mode must be one of {MODES}")
    if cfg.generator is not None and cfg.generator not in GENERATORS:
        raise io.ConfigError(f"generator must be one of {GENERATORS}")
    return cfg


def _driver_config(cfg: io.RunConfig) -> DriverConfig:
    try:
        gn = GnConfig(
            lam=cfg.lam,
            epsilon_0=cfg.epsilon_0,
            eta_step=cfg.eta_step,
            max_inner_iters=cfg.max_inner_iters,
            gamma_floor=cfg.gamma_floor,
        )
        alm = AlmConfig(gamma=cfg.alm_gamma, tol=cfg.alm_tol, max_iters=cfg.alm_max_iters)
        return DriverConfig(
            residual_tol=cfg.tol,
            max_components=cfg.max_components,
            mode=cfg.mode,
            gn=gn,
            alm=alm,
            min_energy_reduction=cfg.min_energy_reduction,
            guess=cfg.guess,
        )
    except ValueError as exc:
        raise io.ConfigError(str(exc)) from None


def _generate(cfg: io.RunConfig, name: str):
    """Synthetic ensemble plus a dict of ground-truth columns."""
    kw = {k: v for k, v in (("n_samples", cfg.n_samples), ("m_signals", cfg.m_signals),
                            ("noise_scale", cfg.noise_scale)) if v is not None}
    if name == "example1":
        ens = generate_example1(cfg.seed, **kw)
        t = ens.times
        return ens, {"theta": chirp_phase(t), "if_hz": chirp_frequency(t)}
    spec = CableSpec(cfg.mass_density, cfg.length, cfg.cable_modes())
    ens, truth = synthetic_cable(cfg.seed, spec=spec, **kw)
    return ens, {"theta": truth["theta"], "omega": truth["omega"], "tension": truth["tension"]}


def _load(cfg: io.RunConfig, default_generator: str | None = None):
    if cfg.input and cfg.generator:
        raise io.ConfigError("give either an input file or a generator, not both")
    if cfg.input:
        return io.read_signals(cfg.input, center=cfg.center)
    name = cfg.generator or default_generator
    if name is None:
        raise io.ConfigError("no input: pass --input or --generator")
    return _generate(cfg, name)[0]


def _outdir(cfg: io.RunConfig) -> Path:
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_result(out: Path, result: DecompositionResult, ensemble, cfg: io.RunConfig, extra=None):
    io.write_components(out / "components.csv", result, ensemble)
    io.write_residuals(out / "residuals.csv", result, ensemble)
    io.write_outliers(out / "outliers.csv", result, ensemble)
    doc = {
        "K": result.K,
        "stop_reason": result.stop_reason,
        "components": result.diagnostics,
        "config": asdict(cfg),
        "duration": ensemble.duration,
        "t_start": ensemble.t_start,
        "offsets": list(ensemble.offsets),
    }
    doc.update(extra or {})
    io.write_json(out / "diagnostics.json", doc)


def cmd_generate(cfg: io.RunConfig) -> int:
    out = _outdir(cfg)
    ens, truth = _generate(cfg, cfg.generator or "example1")
    io.write_signals(out / "signals.csv", ens)
    header = ["t"] + list(truth)
    io.write_columns(out / "truth.csv", header, [ens.physical_times] + list(truth.values()))
    return 0


def cmd_decompose(cfg: io.RunConfig) -> int:
    driver = _driver_config(cfg)
    ensemble = _load(cfg)
    out = _outdir(cfg)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ComponentCapReached)
            result = decompose(ensemble, driver)
    except NoConvergence as exc:
        _write_result(out, exc.partial, ensemble, cfg, {"error": io.error_document(exc)})
        raise
    _write_result(out, result, ensemble, cfg)
    return 0


def cmd_cable(cfg: io.RunConfig) -> int:
    driver = _driver_config(cfg)
    ensemble = _load(cfg, default_generator=None)
    try:
        spec = CableSpec(cfg.mass_density, cfg.length, cfg.cable_modes())
    except ValueError as exc:
        raise io.ConfigError(str(exc)) from None
    out = _outdir(cfg)
    try:
        res = harmonic_fuse(ensemble, spec, mode=driver.mode, gn=driver.gn, alm=driver.alm)
        failure = None
    except NoConvergence as exc:
        res, failure = exc.partial, exc
    comps = [ImfComponent(res.phase, a, b, n) for n, (a, b) in res.envelopes.items()]
    fitted = sum((c.mode_signals() for c in comps), np.zeros_like(ensemble.values))
    result = DecompositionResult(comps, ensemble.values - fitted, [res.diagnostics],
                                 "no_convergence" if failure else "fused")
    extra = {"modes": list(spec.modes)}
    if failure:
        extra["error"] = io.error_document(failure)
    _write_result(out, result, ensemble, cfg, extra)
    io.write_tension(out / "tension.csv", res.times, res.omega, res.tension)
    if failure:
        raise failure
    return 0


COMMANDS = {"generate": cmd_generate, "decompose": cmd_decompose, "cable": cmd_cable}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = None
    try:
        cfg = resolve_config(args)
        out = Path(cfg.output)
        return COMMANDS[args.verb](cfg)
    except SparseTFError as exc:
        doc = io.error_document(exc)
        print(json.dumps(doc), file=sys.stderr)
        if out is not None:
            try:
                out.mkdir(parents=True, exist_ok=True)
                io.write_json(out / "error.json", doc)
            except OSError:
                pass
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
