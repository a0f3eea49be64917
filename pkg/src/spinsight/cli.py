"""Command-line harness chaining generation, training, evaluation and sweeps.

Every command validates its full configuration before touching the disk, and
each emitted CSV starts with a comment line carrying the tool version and
the config hash.  Exit codes: 0 success, 2 configuration error, 3 solver
failure, 4 I/O or data error.
"""

from __future__ import annotations

import csv
import functools
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .config import ExperimentConfig, config_hash, load_config, reseed
from .data import Dataset, generate_dataset, load_dataset
from .errors import ConfigError, ConvergenceError, DataError, LatticeError
from .imageio import write_png
from .nn import (
    FLAT_COUNTERPART,
    TrainConfig,
    build_network,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .nn.network import PRESETS
from .nn.optim import mse_loss
from .qubism import QubismImage, normalize_image, qubism_map
from .states import DenseState


def _fail(exc, code):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, LatticeError) as exc:
            _fail(exc, 2)
        except ConvergenceError as exc:
            _fail(exc, 3)
        except (DataError, OSError) as exc:
            _fail(exc, 4)

    return wrapper


class Session:
    """Global flags resolved once per invocation."""

    def __init__(self, config_source, seed, out_dir, deterministic, threads):
        self.config_source = config_source
        self.seed = seed
        self.out_override = out_dir
        self.deterministic = deterministic
        self.threads = 1 if deterministic else threads

    def config(self) -> ExperimentConfig:
        if self.config_source is None:
            raise ConfigError("this command needs --config <file-or-preset>")
        cfg = load_config(self.config_source)
        if self.seed is not None:
            cfg = reseed(cfg, self.seed)
        if self.out_override is not None:
            cfg = cfg.with_overrides(out_dir=self.out_override)
        return cfg

    def out_dir(self, cfg=None) -> Path:
        if self.out_override is not None:
            return Path(self.out_override)
        if cfg is not None:
            return Path(cfg.out_dir)
        raise ConfigError("no output directory: pass --out or --config")


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_source", default=None,
              help="TOML config file or built-in preset name.")
@click.option("--seed", type=int, default=None,
              help="Master seed overriding every per-component seed.")
@click.option("--out", "out_dir", default=None, help="Output directory.")
@click.option("--deterministic", is_flag=True,
              help="Single-threaded numerics for byte-stable artifacts.")
@click.option("--threads", type=int, default=None, help="BLAS thread cap.")
@click.pass_context
def cli(ctx, config_source, seed, out_dir, deterministic, threads):
    session = Session(config_source, seed, out_dir, deterministic, threads)
    if session.threads is not None:
        ctx.with_resource(threadpool_limits(limits=session.threads))
    ctx.obj = session


def _comment(cfg: ExperimentConfig) -> str:
    return f"# spinsight {__version__} config_hash={config_hash(cfg)}"


def _write_csv(path, header, rows, comment):
    with open(path, "w", newline="") as fh:
        fh.write(comment + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path):
    """Rows of one of our CSVs, skipping the leading comment line."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _fmt(x) -> str:
    return repr(float(x))


# -- dataset plumbing shared by train/eval/sweeps ---------------------------


def _dataset_dir(cfg, out_dir) -> Path:
    return Path(out_dir) / "dataset"


def _generate(cfg: ExperimentConfig, out_dir) -> Path:
    ds_dir = _dataset_dir(cfg, out_dir)
    summary = generate_dataset(
        cfg.split, cfg.pipeline, ds_dir,
        sidecar_extra={"name": cfg.name, "config_hash": config_hash(cfg)},
    )
    if summary.n_failed:
        click.echo(
            f"warning: {summary.n_failed} solves failed and were skipped",
            err=True,
        )
    return ds_dir


def _inputs(ds: Dataset, preset: str, split: str) -> np.ndarray:
    if PRESETS[preset]["dims"] == 1:
        return ds.flat_inputs(split)
    return ds.cnn_inputs(split)


def _network_for(cfg: ExperimentConfig, ds: Dataset, preset, seed):
    size = ds.side if PRESETS[preset]["dims"] == 2 else ds.side * ds.side
    return build_network(
        preset, size, seed=seed,
        dropout_p=cfg.dropout, dropout_after_conv=cfg.dropout_after_conv,
    )


def _train_once(cfg, ds, preset, seed, run_dir):
    """One training cycle; writes checkpoint + history, returns the network."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    net = _network_for(cfg, ds, preset, seed)
    tc = TrainConfig(
        epochs=cfg.epochs, batch_size=cfg.batch_size, dropout=cfg.dropout,
        validation_fraction=cfg.validation_fraction,
        learning_rate=cfg.learning_rate, seed=seed,
    )
    result = train(net, _inputs(ds, preset, "train"), ds.labels["train"], tc)
    save_checkpoint(net, run_dir / "model.qnet")
    _write_csv(
        run_dir / "history.csv",
        ["epoch", "train_loss", "val_loss"],
        [(e, _fmt(t), _fmt(v)) for e, t, v in result.history],
        _comment(cfg),
    )
    return net, result


def _evaluate(cfg, ds: Dataset, net, report_dir=None):
    """Per-sample predictions and the epsilon_t / epsilon_g summary."""
    rows = []
    metrics = {}
    for split in ("test", "gen"):
        labels = ds.labels[split]
        if labels.size == 0:
            continue
        preds = net.predict(_inputs(ds, net.meta["preset"], split))
        metrics["epsilon_t" if split == "test" else "epsilon_g"] = mse_loss(
            preds, labels
        )[0]
        rows.extend(
            (i, _fmt(t), _fmt(p), split)
            for i, t, p in zip(ds.ids[split], labels, preds)
        )
    if report_dir is not None:
        report_dir = Path(report_dir)
        report_dir.mkdir(parents=True, exist_ok=True)
        _write_csv(
            report_dir / "predictions.csv",
            ["id", "param_value", "prediction", "split"],
            rows, _comment(cfg),
        )
        _write_csv(
            report_dir / "summary.csv",
            ["metric", "value"],
            [(k, _fmt(v)) for k, v in metrics.items()],
            _comment(cfg),
        )
    return metrics


def _checkpoint_matches(net, ds: Dataset):
    dims = PRESETS[net.meta["preset"]]["dims"]
    expect = ds.side if dims == 2 else ds.side * ds.side
    if net.meta["input_size"] != expect:
        raise ConfigError(
            f"checkpoint expects input size {net.meta['input_size']}, "
            f"dataset provides {expect}"
        )


# -- commands ----------------------------------------------------------------


@cli.command()
@click.pass_obj
@guarded
def generate(session):
    """Materialize the labeled image dataset for the configured sweep."""
    cfg = session.config()
    ds_dir = _generate(cfg, session.out_dir(cfg))
    rows = read_csv(ds_dir / "manifest.csv")
    click.echo(f"wrote {len(rows)} samples to {ds_dir}")


@cli.command("train")
@click.option("--dataset", "dataset_dir", default=None,
              help="Dataset directory (default <out>/dataset).")
@click.pass_obj
@guarded
def train_cmd(session, dataset_dir):
    """Train the configured network; keeps the best-validation snapshot."""
    cfg = session.config()
    out = session.out_dir(cfg)
    ds_dir = Path(dataset_dir) if dataset_dir else _dataset_dir(cfg, out)
    ds = load_dataset(ds_dir / "manifest.csv")
    _, result = _train_once(cfg, ds, cfg.network_preset, cfg.train_seed, out)
    click.echo(
        f"best epoch {result.best_epoch} "
        f"(validation loss {result.best_val_loss:.3e}); "
        f"checkpoint at {out / 'model.qnet'}"
    )


@cli.command("eval")
@click.option("--checkpoint", default=None, help="QNET file (default <out>/model.qnet).")
@click.option("--dataset", "dataset_dir", default=None)
@click.pass_obj
@guarded
def eval_cmd(session, checkpoint, dataset_dir):
    """Write per-sample predictions and the epsilon_t/epsilon_g summary."""
    cfg = session.config()
    out = session.out_dir(cfg)
    ckpt = Path(checkpoint) if checkpoint else out / "model.qnet"
    ds_dir = Path(dataset_dir) if dataset_dir else _dataset_dir(cfg, out)
    net = load_checkpoint(ckpt)
    ds = load_dataset(ds_dir / "manifest.csv")
    _checkpoint_matches(net, ds)
    metrics = _evaluate(cfg, ds, net, report_dir=out)
    for key, value in metrics.items():
        click.echo(f"{key} = {value:.6e}")


@cli.command()
@click.option("--checkpoint", default=None)
@click.option("--dataset", "dataset_dir", default=None)
@click.option("--split", default="test", type=click.Choice(["train", "test", "gen"]))
@click.pass_obj
@guarded
def predict(session, checkpoint, dataset_dir, split):
    """Predictions for one split, without a metric summary."""
    cfg = session.config()
    out = session.out_dir(cfg)
    ckpt = Path(checkpoint) if checkpoint else out / "model.qnet"
    ds_dir = Path(dataset_dir) if dataset_dir else _dataset_dir(cfg, out)
    net = load_checkpoint(ckpt)
    ds = load_dataset(ds_dir / "manifest.csv")
    _checkpoint_matches(net, ds)
    if ds.labels[split].size == 0:
        raise DataError(f"dataset has no {split!r} samples")
    preds = net.predict(_inputs(ds, net.meta["preset"], split))
    _write_csv(
        out / f"predictions_{split}.csv",
        ["id", "prediction", "split"],
        [(i, _fmt(p), split) for i, p in zip(ds.ids[split], preds)],
        _comment(cfg),
    )
    click.echo(f"wrote {preds.size} predictions")


@cli.command()
@click.option("--dataset", "dataset_dir", default=None,
              help="Render every image of a dataset.")
@click.option("--state", "state_file", default=None,
              help="Render a single .npy amplitude vector.")
@click.pass_obj
@guarded
def render(session, dataset_dir, state_file):
    """Export grayscale PNGs from a dataset or a raw state vector."""
    if (dataset_dir is None) == (state_file is None):
        raise ConfigError("pass exactly one of --dataset / --state")
    out = session.out_dir(session.config() if session.config_source else None)
    out.mkdir(parents=True, exist_ok=True)
    if state_file is not None:
        amps = np.load(state_file)
        state = DenseState.from_vector(amps)
        img = normalize_image(qubism_map(state))
        target = out / (Path(state_file).stem + ".png")
        write_png(img, target)
        click.echo(f"wrote {target}")
        return
    ds_dir = Path(dataset_dir)
    ds = load_dataset(ds_dir / "manifest.csv")
    count = 0
    for split in ("train", "test", "gen"):
        for sample_id, pixels in zip(ds.ids[split], ds.images[split]):
            img = normalize_image(QubismImage(ds.side, pixels))
            write_png(img, out / f"{sample_id}.png")
            count += 1
    click.echo(f"wrote {count} PNGs to {out}")


@cli.command("sweep-delta")
@click.option("--deltas", default="0.2,0.4,0.6", help="Comma-separated widths.")
@click.option("--repeats", default=3, show_default=True,
              help="Independent initializations per width.")
@click.pass_obj
@guarded
def sweep_delta(session, deltas, repeats):
    """Generalization error versus the excluded-window width."""
    cfg = session.config()
    out = session.out_dir(cfg)
    widths = [float(tok) for tok in deltas.split(",") if tok]
    if any(not 0.0 <= d < 1.0 for d in widths):
        raise ConfigError("every delta must lie in [0, 1)")
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    rows = []
    for delta in widths:
        sub = cfg.with_overrides(split=replace(cfg.split, delta=delta))
        run_root = out / f"delta-{delta:g}"
        ds = load_dataset(_generate(sub, run_root) / "manifest.csv")
        et, eg = [], []
        for r in range(repeats):
            net, _ = _train_once(
                sub, ds, sub.network_preset, sub.train_seed + r,
                run_root / f"seed-{r}",
            )
            metrics = _evaluate(sub, ds, net, report_dir=run_root / f"seed-{r}")
            et.append(metrics["epsilon_t"])
            if "epsilon_g" in metrics:
                eg.append(metrics["epsilon_g"])
        rows.append(
            (
                _fmt(delta),
                _fmt(np.mean(eg)) if eg else "",
                _fmt(np.std(eg)) if eg else "",
                _fmt(np.mean(et)),
                _fmt(np.std(et)),
                repeats,
            )
        )
    _write_csv(
        out / "sweep_delta.csv",
        ["delta", "mean_eps_g", "std_eps_g", "mean_eps_t", "std_eps_t", "repeats"],
        rows, _comment(cfg),
    )
    click.echo(f"wrote {out / 'sweep_delta.csv'}")


@cli.command("sweep-size")
@click.option("--values", required=True, help="Comma-separated sizes.")
@click.option("--vary", type=click.Choice(["L", "Lb"]), default="Lb",
              show_default=True)
@click.option("--repeats", default=3, show_default=True)
@click.pass_obj
@guarded
def sweep_size(session, values, vary, repeats):
    """Generalization error versus system size L or subsystem size L_b."""
    cfg = session.config()
    out = session.out_dir(cfg)
    sizes = [int(tok) for tok in values.split(",") if tok]
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    subs = []
    for size in sizes:  # validate the whole sweep before any side effects
        if vary == "Lb":
            pipeline = replace(cfg.pipeline, subsystem_size=size)
        else:
            if cfg.pipeline.lattice.kind != "chain":
                raise ConfigError("an L sweep needs a chain lattice")
            pipeline = replace(
                cfg.pipeline,
                lattice=replace(cfg.pipeline.lattice, extent=(size,)),
            )
        subs.append(cfg.with_overrides(pipeline=pipeline))
    rows = []
    for size, sub in zip(sizes, subs):
        run_root = out / f"{vary}-{size}"
        ds = load_dataset(_generate(sub, run_root) / "manifest.csv")
        et, eg = [], []
        for r in range(repeats):
            net, _ = _train_once(
                sub, ds, sub.network_preset, sub.train_seed + r,
                run_root / f"seed-{r}",
            )
            metrics = _evaluate(sub, ds, net, report_dir=run_root / f"seed-{r}")
            et.append(metrics["epsilon_t"])
            if "epsilon_g" in metrics:
                eg.append(metrics["epsilon_g"])
        rows.append(
            (
                size,
                _fmt(np.mean(eg)) if eg else "",
                _fmt(np.std(eg)) if eg else "",
                _fmt(np.mean(et)),
                _fmt(np.std(et)),
                repeats,
            )
        )
    _write_csv(
        out / "sweep_size.csv",
        [vary.lower(), "mean_eps_g", "std_eps_g", "mean_eps_t", "std_eps_t", "repeats"],
        rows, _comment(cfg),
    )
    click.echo(f"wrote {out / 'sweep_size.csv'}")


@cli.command("baseline-flat")
@click.option("--repeats", default=3, show_default=True)
@click.pass_obj
@guarded
def baseline_flat(session, repeats):
    """Train the image network against its flat 1D counterpart on one dataset."""
    cfg = session.config()
    if not cfg.pipeline.use_rdm:
        raise ConfigError("the flat baseline compares RDM-path datasets")
    if cfg.network_preset not in FLAT_COUNTERPART:
        raise ConfigError(
            f"no flat counterpart for preset {cfg.network_preset!r}"
        )
    flat_preset = FLAT_COUNTERPART[cfg.network_preset]
    out = session.out_dir(cfg)
    ds = load_dataset(_generate(cfg, out) / "manifest.csv")
    rows = []
    for r in range(repeats):
        seed = cfg.train_seed + r
        results = {}
        for tag, preset in (("qubism", cfg.network_preset), ("flat", flat_preset)):
            net, _ = _train_once(cfg, ds, preset, seed, out / f"{tag}-seed-{r}")
            results[tag] = _evaluate(
                cfg, ds, net, report_dir=out / f"{tag}-seed-{r}"
            )
        row = [seed,
               _fmt(results["qubism"]["epsilon_t"]),
               _fmt(results["flat"]["epsilon_t"]),
               _fmt(results["flat"]["epsilon_t"] / results["qubism"]["epsilon_t"])]
        if "epsilon_g" in results["qubism"]:
            row += [
                _fmt(results["qubism"]["epsilon_g"]),
                _fmt(results["flat"]["epsilon_g"]),
                _fmt(results["flat"]["epsilon_g"] / results["qubism"]["epsilon_g"]),
            ]
        else:
            row += ["", "", ""]
        rows.append(row)
    _write_csv(
        out / "baseline.csv",
        ["seed", "eps_t_qubism", "eps_t_flat", "ratio_t",
         "eps_g_qubism", "eps_g_flat", "ratio_g"],
        rows, _comment(cfg),
    )
    click.echo(f"wrote {out / 'baseline.csv'}")


def main():
    cli(prog_name="spinsight")


if __name__ == "__main__":
    main()
