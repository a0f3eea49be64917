"""Experiment configuration: TOML files, built-in desk presets, validation.

A config file fully pins one experiment (model, split plan, solver options,
network preset, training hyperparameters, seeds).  Its canonical JSON hash
is stamped into every CSV the harness emits, so artifacts are traceable to
the exact configuration that produced them.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .data import PipelineOpts, SplitSpec
from .errors import ConfigError, SpinsightError
from .lattice import Lattice
from .models import FAMILIES
from .nn.network import PRESETS
from .solvers import DmrgOptions, LanczosOptions

BUILTIN_PRESETS = ("desk-qim", "desk-xy", "desk-xxz", "desk-2d")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    split: SplitSpec
    pipeline: PipelineOpts
    epochs: int = 300
    batch_size: int = 32
    dropout: float = 0.5
    validation_fraction: float = 0.1
    learning_rate: float = 0.001
    train_seed: int = 0
    network_preset: str = "small-2d"
    dropout_after_conv: bool = False
    out_dir: str = "runs/out"

    def validated(self) -> "ExperimentConfig":
        if self.network_preset not in PRESETS:
            raise ConfigError(f"unknown network preset {self.network_preset!r}")
        dims = PRESETS[self.network_preset]["dims"]
        if dims == 1 and not self.pipeline.use_rdm:
            raise ConfigError("flat 1D presets require the RDM path")
        side = self.pipeline.image_side
        if side < 4:
            raise ConfigError(
                f"image side {side} too small for two pooling layers"
            )
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")
        return self

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw).validated()


def config_hash(cfg: ExperimentConfig) -> str:
    """Short stable hash of the canonical config dict."""
    blob = json.dumps(_as_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _as_dict(cfg: ExperimentConfig) -> dict:
    p, s = cfg.pipeline, cfg.split
    return {
        "name": cfg.name,
        "model": {
            "family": p.family,
            "lattice": p.lattice.kind,
            "extent": list(p.lattice.extent),
            "boundary": p.lattice.boundary,
        },
        "split": {
            "n_train": s.n_train,
            "n_test": s.n_test,
            "delta": s.delta,
            "n_gen": s.n_gen,
            "dh": s.dh,
            "seed": s.seed,
            "mode": s.mode,
        },
        "pipeline": {
            "use_rdm": p.use_rdm,
            "subsystem_size": p.subsystem_size,
            "solver": p.solver,
            "ordering": p.ordering,
            "write_pngs": p.write_pngs,
            "store_states": p.store_states,
        },
        "lanczos": {
            "max_iterations": p.lanczos.max_iterations,
            "tolerance": p.lanczos.tolerance,
            "seed": p.lanczos.seed,
        },
        "dmrg": {
            "chi_max": p.dmrg.chi_max,
            "max_sweeps": p.dmrg.max_sweeps,
            "energy_tolerance": p.dmrg.energy_tolerance,
            "seed": p.dmrg.seed,
        },
        "train": {
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "dropout": cfg.dropout,
            "validation_fraction": cfg.validation_fraction,
            "learning_rate": cfg.learning_rate,
            "seed": cfg.train_seed,
            "preset": cfg.network_preset,
            "dropout_after_conv": cfg.dropout_after_conv,
        },
    }


def _table(data: dict, name: str) -> dict:
    section = data
    for part in name.split("."):
        section = section.get(part, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    return section


def _build(data: dict, name: str) -> ExperimentConfig:
    model = _table(data, "model")
    split = _table(data, "split")
    pipe = _table(data, "pipeline")
    lan = _table(data, "solver.lanczos")
    dm = _table(data, "solver.dmrg")
    train = _table(data, "train")
    run = _table(data, "run")
    try:
        family = model.get("family", "qim")
        if family not in FAMILIES:
            raise ConfigError(f"unknown model family {family!r}")
        if model.get("lattice", "chain") == "grid":
            lattice = Lattice.grid(
                int(model["rows"]), int(model["cols"]),
                periodic=model.get("boundary", "periodic") == "periodic",
            )
        else:
            lattice = Lattice.chain(
                int(model["L"]),
                periodic=model.get("boundary", "periodic") == "periodic",
            )
        cfg = ExperimentConfig(
            name=name,
            split=SplitSpec(
                n_train=int(split.get("n_train", 100)),
                n_test=int(split.get("n_test", 25)),
                delta=float(split.get("delta", 0.0)),
                n_gen=int(split.get("n_gen", 40)),
                dh=float(split.get("dh", 0.01)),
                seed=int(split.get("seed", 7)),
                mode=split.get("mode", "grid"),
            ),
            pipeline=PipelineOpts(
                family=family,
                lattice=lattice,
                subsystem_size=int(pipe.get("subsystem_size", 0)),
                use_rdm=bool(pipe.get("use_rdm", True)),
                solver=pipe.get("solver", "ed"),
                lanczos=LanczosOptions(
                    max_iterations=int(lan.get("max_iterations", 1000)),
                    tolerance=float(lan.get("tolerance", 1e-10)),
                    seed=int(lan.get("seed", 11)),
                ),
                dmrg=DmrgOptions(
                    chi_max=int(dm.get("chi_max", 64)),
                    max_sweeps=int(dm.get("max_sweeps", 20)),
                    energy_tolerance=float(dm.get("energy_tolerance", 1e-9)),
                    seed=int(dm.get("seed", 11)),
                ),
                ordering=pipe.get("ordering", "interleaved"),
                write_pngs=bool(pipe.get("write_pngs", False)),
                store_states=bool(pipe.get("store_states", False)),
            ),
            epochs=int(train.get("epochs", 300)),
            batch_size=int(train.get("batch_size", 32)),
            dropout=float(train.get("dropout", 0.5)),
            validation_fraction=float(train.get("validation_fraction", 0.1)),
            learning_rate=float(train.get("learning_rate", 0.001)),
            train_seed=int(train.get("seed", 1234)),
            network_preset=train.get("preset", "small-2d"),
            dropout_after_conv=bool(train.get("dropout_after_conv", False)),
            out_dir=run.get("out_dir", f"runs/{name}"),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    except SpinsightError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validated()


def load_config(source: str) -> ExperimentConfig:
    """Load a config from a TOML path or a built-in preset name."""
    path = Path(source)
    if path.exists():
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        return _build(data, path.stem)
    if source in BUILTIN_PRESETS:
        blob = resources.files("spinsight.presets").joinpath(f"{source}.toml")
        data = tomllib.loads(blob.read_text())
        return _build(data, source)
    raise ConfigError(
        f"config {source!r} is neither a file nor one of {BUILTIN_PRESETS}"
    )


def reseed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    """Derive every component seed from one master seed."""
    pipeline = replace(
        cfg.pipeline,
        lanczos=replace(cfg.pipeline.lanczos, seed=seed + 2),
        dmrg=replace(cfg.pipeline.dmrg, seed=seed + 3),
    )
    return cfg.with_overrides(
        split=replace(cfg.split, seed=seed + 1),
        pipeline=pipeline,
        train_seed=seed + 4,
    )
