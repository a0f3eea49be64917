"""Parameter splits and materialized image datasets.

Training values form an evenly spaced midpoint grid over
(0, 0.5 - delta/2) u (0.5 + delta/2, 1); testing values use the same
construction shifted a quarter step inside each cell so the two grids can
never touch; generalizing values are the N_g-point, dh-spaced grid centered
on 0.5 inside the excluded window.  Generation runs the solver -> RDM ->
Qubism pipeline per value and writes a checksummed manifest that pins every
seed, so identical inputs reproduce identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, ConvergenceError, DataError
from .imageio import read_qimg, write_png, write_qimg
from .lattice import Lattice
from .models import ModelSpec, build_terms
from .qubism import QubismImage, normalize_image, qubism_map
from .rdm import ORDERINGS, gauge_fix, middle_block, purify, rdm_dense, rdm_mps
from .solvers import (
    DmrgOptions,
    LanczosOptions,
    build_mpo,
    dmrg_ground,
    ed_ground,
    mps_to_dense,
)

MANIFEST_HEADER = [
    "id",
    "family",
    "param_name",
    "param_value",
    "split",
    "image_path",
    "state_path",
    "checksum_sha256",
]

MANIFEST_NAME = "manifest.csv"
SIDECAR_NAME = "dataset.toml"
STAGES_NAME = "stages.csv"


@dataclass(frozen=True)
class SplitSpec:
    """Sampling plan for one parameter sweep over the open interval (0, 1)."""

    n_train: int
    n_test: int
    delta: float = 0.0
    n_gen: int = 40
    dh: float = 0.01
    seed: int = 0
    mode: str = "grid"  # "grid" | "random"

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ConfigError(f"delta must be in [0, 1), got {self.delta}")
        if self.n_train < 1 or self.n_test < 0:
            raise ConfigError("need n_train >= 1 and n_test >= 0")
        if self.mode not in ("grid", "random"):
            raise ConfigError(f"unknown sampling mode {self.mode!r}")
        if self.delta > 0.0:
            if self.n_gen < 0 or self.dh <= 0.0:
                raise ConfigError("generalizing grid needs n_gen >= 0 and dh > 0")
            if self.n_gen > 0 and (self.n_gen - 1) * self.dh >= self.delta:
                raise ConfigError(
                    f"{self.n_gen} points at spacing {self.dh} do not fit "
                    f"inside a width-{self.delta} window"
                )

    @property
    def window(self) -> tuple[float, float]:
        return 0.5 - self.delta / 2.0, 0.5 + self.delta / 2.0


@dataclass(frozen=True)
class SplitValues:
    train: np.ndarray
    test: np.ndarray
    gen: np.ndarray

    def items(self):
        for split in ("train", "test", "gen"):
            for v in getattr(self, split):
                yield split, float(v)


def _regions(spec: SplitSpec):
    lo, hi = spec.window
    if spec.delta == 0.0:
        return [(0.0, 1.0)]
    return [(0.0, lo), (hi, 1.0)]


def _allocate(n, regions):
    total = sum(b - a for a, b in regions)
    counts = []
    placed = 0
    for k, (a, b) in enumerate(regions):
        if k == len(regions) - 1:
            counts.append(n - placed)
        else:
            c = int(np.floor(n * (b - a) / total + 0.5))
            counts.append(c)
            placed += c
    return counts


def _grid(n, regions, shift):
    """n points over the regions at cell fraction ``shift`` (0.5 = midpoint)."""
    values = []
    for count, (a, b) in zip(_allocate(n, regions), regions):
        if count <= 0:
            continue
        step = (b - a) / count
        values.extend(a + (k + shift) * step for k in range(count))
    return np.array(sorted(values))


def sample_splits(spec: SplitSpec) -> SplitValues:
    """Produce the disjoint train/test/generalizing parameter values."""
    regions = _regions(spec)
    if spec.mode == "grid":
        train = _grid(spec.n_train, regions, 0.5)
        test = _grid(spec.n_test, regions, 0.75)
    else:
        rng = np.random.default_rng(spec.seed)
        draws = []
        for count, (a, b) in zip(
            _allocate(spec.n_train + spec.n_test, regions), regions
        ):
            draws.append(rng.uniform(a, b, size=count))
        pool = np.sort(np.concatenate(draws)) if draws else np.array([])
        pick = np.random.default_rng(spec.seed + 1).permutation(pool.size)
        train = np.sort(pool[pick[: spec.n_train]])
        test = np.sort(pool[pick[spec.n_train :]])
    if spec.delta > 0.0 and spec.n_gen > 0:
        k = np.arange(spec.n_gen)
        gen = 0.5 - (spec.n_gen / 2.0 - k - 0.5) * spec.dh
    else:
        gen = np.array([])
    _validate_values(spec, train, test, gen)
    return SplitValues(train, test, gen)


def _validate_values(spec, train, test, gen):
    lo, hi = spec.window
    for name, vals in (("train", train), ("test", test)):
        if np.any(vals <= 0.0) or np.any(vals >= 1.0):
            raise ConfigError(f"{name} values exceed the open interval (0, 1)")
        if spec.delta > 0.0 and np.any((vals > lo) & (vals < hi)):
            raise ConfigError(f"{name} values intrude on the excluded window")
    if gen.size and (np.any(gen <= lo) or np.any(gen >= hi)):
        raise ConfigError("generalizing values exceed the excluded window")
    merged = np.concatenate([train, test, gen])
    if np.unique(merged).size != merged.size:
        raise ConfigError("train/test/generalizing values collide")


@dataclass(frozen=True)
class PipelineOpts:
    """Everything needed to turn one parameter value into one image."""

    family: str
    lattice: Lattice
    subsystem_size: int = 0          # L_b; ignored on the direct path
    use_rdm: bool = True
    solver: str = "ed"               # "ed" | "dmrg"
    lanczos: LanczosOptions = LanczosOptions()
    dmrg: DmrgOptions = DmrgOptions()
    ordering: str = "interleaved"
    write_pngs: bool = False
    store_states: bool = False

    def __post_init__(self):
        n = self.lattice.site_count
        if self.solver not in ("ed", "dmrg"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.ordering not in ORDERINGS:
            raise ConfigError(f"unknown purification ordering {self.ordering!r}")
        if self.use_rdm:
            if not 0 < self.subsystem_size <= n // 2:
                raise ConfigError(
                    f"subsystem size {self.subsystem_size} must lie in "
                    f"[1, {n // 2}] for a middle block on {n} sites"
                )
            middle_block(self.lattice, self.subsystem_size)  # placement check
        else:
            if n > 20:
                raise ConfigError("direct imaging needs 2^L amplitudes: L <= 20")
            if n % 2:
                raise ConfigError("direct imaging needs an even site count")
        if self.solver == "ed" and n > 20:
            raise ConfigError("exact diagonalization capped at 20 sites")

    @property
    def image_side(self) -> int:
        n = self.lattice.site_count
        return 1 << (self.subsystem_size if self.use_rdm else n // 2)


@dataclass
class GenerationSummary:
    out_dir: Path
    manifest_path: Path
    n_written: int
    n_failed: int
    failed_values: list = field(default_factory=list)


def _solve_to_image(opts: PipelineOpts, value: float):
    """Ground-state solve for one parameter value, mapped to a QubismImage.

    Returns (image, dense_state_or_None); the dense state comes back only on
    the direct path where stage diagnostics need it.
    """
    model = ModelSpec(opts.family, opts.lattice, value)
    terms = build_terms(model)
    mps = None
    dense = None
    if opts.solver == "ed":
        _, dense = ed_ground(model, opts.lanczos)
    else:
        result = dmrg_ground(build_mpo(terms), opts.dmrg)
        if not result.converged:
            raise ConvergenceError(
                f"DMRG unconverged at {opts.family} parameter {value}"
            )
        mps = result.state

    if opts.use_rdm:
        block = middle_block(opts.lattice, opts.subsystem_size)
        rho = rdm_dense(dense, block) if dense is not None else rdm_mps(mps, block)
        return qubism_map(purify(rho, opts.ordering)), None
    if dense is None:
        dense = mps_to_dense(mps)
    dense = gauge_fix(dense)
    return qubism_map(dense), dense


def generate_dataset(
    spec: SplitSpec, opts: PipelineOpts, out_dir, sidecar_extra: dict | None = None
) -> GenerationSummary:
    """Materialize the labeled image dataset for one parameter sweep."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    if opts.store_states:
        (out_dir / "states").mkdir(exist_ok=True)

    values = sample_splits(spec)
    ordered = sorted(values.items(), key=lambda kv: (kv[1], kv[0]))
    counters = {"train": 0, "test": 0, "gen": 0}
    rows = []
    states = []  # (id, amplitudes) on the direct path
    failed = []
    for split, value in ordered:
        sample_id = f"{split}-{counters[split]:04d}"
        counters[split] += 1
        try:
            image, dense = _solve_to_image(opts, value)
        except ConvergenceError:
            failed.append((sample_id, value))
            continue
        image_rel = f"images/{sample_id}.qimg"
        write_qimg(image, out_dir / image_rel)
        checksum = hashlib.sha256((out_dir / image_rel).read_bytes()).hexdigest()
        if opts.write_pngs:
            write_png(normalize_image(image), out_dir / f"images/{sample_id}.png")
        state_rel = ""
        if opts.store_states and dense is not None:
            state_rel = f"states/{sample_id}.npy"
            np.save(out_dir / state_rel, dense.amplitudes)
        if dense is not None:
            states.append((sample_id, dense.amplitudes))
        rows.append(
            {
                "id": sample_id,
                "family": opts.family,
                "param_name": ModelSpec(opts.family, opts.lattice, value).param_name,
                "param_value": repr(value),
                "split": split,
                "image_path": image_rel,
                "state_path": state_rel,
                "checksum_sha256": checksum,
            }
        )

    if not rows:
        raise ConvergenceError("every solve failed; no dataset was produced")

    manifest_path = out_dir / MANIFEST_NAME
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_HEADER)
        writer.writeheader()
        writer.writerows(rows)

    _write_sidecar(out_dir / SIDECAR_NAME, spec, opts, sidecar_extra or {})
    if states:
        _write_stages(out_dir / STAGES_NAME, states)
    return GenerationSummary(out_dir, manifest_path, len(rows), len(failed), failed)


def _write_stages(path, states):
    """Cluster direct-path states into level-crossing stages by overlap.

    Samples are visited in ascending parameter order; a new class starts
    whenever the overlap with the previous state drops below 1 - 1e-8.
    """
    classes = []
    current = -1
    prev = None
    for sample_id, amps in states:
        if prev is None or abs(float(np.dot(prev, amps))) <= 1.0 - 1e-8:
            current += 1
        classes.append((sample_id, current))
        prev = amps
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "stage_class"])
        writer.writerows(classes)


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_sidecar(path, spec: SplitSpec, opts: PipelineOpts, extra: dict):
    sections = {
        "dataset": {"tool_version": __version__, **extra},
        "split": {
            "n_train": spec.n_train,
            "n_test": spec.n_test,
            "delta": spec.delta,
            "n_gen": spec.n_gen,
            "dh": spec.dh,
            "seed": spec.seed,
            "mode": spec.mode,
        },
        "pipeline": {
            "family": opts.family,
            "lattice_kind": opts.lattice.kind,
            "extent": list(opts.lattice.extent),
            "boundary": opts.lattice.boundary,
            "subsystem_size": opts.subsystem_size,
            "use_rdm": opts.use_rdm,
            "solver": opts.solver,
            "ordering": opts.ordering,
            "image_side": opts.image_side,
        },
        "solver.lanczos": {
            "max_iterations": opts.lanczos.max_iterations,
            "tolerance": opts.lanczos.tolerance,
            "seed": opts.lanczos.seed,
        },
        "solver.dmrg": {
            "chi_max": opts.dmrg.chi_max,
            "max_sweeps": opts.dmrg.max_sweeps,
            "energy_tolerance": opts.dmrg.energy_tolerance,
            "seed": opts.dmrg.seed,
        },
    }
    lines = []
    for name, table in sections.items():
        lines.append(f"[{name}]")
        for key, val in table.items():
            if isinstance(val, list):
                lines.append(f"{key} = [{', '.join(_toml_value(x) for x in val)}]")
            else:
                lines.append(f"{key} = {_toml_value(val)}")
        lines.append("")
    Path(path).write_text("\n".join(lines))


@dataclass
class Dataset:
    """In-memory dataset: raw images plus labels, grouped by split tag."""

    side: int
    images: dict          # split -> (N, side, side) raw pixels
    labels: dict          # split -> (N,)
    ids: dict             # split -> list[str]

    def cnn_inputs(self, split: str) -> np.ndarray:
        """Per-image min-max normalized tensors, shape (N, 1, side, side)."""
        imgs = self.images[split]
        out = np.empty_like(imgs)
        for k in range(imgs.shape[0]):
            lo, hi = imgs[k].min(), imgs[k].max()
            out[k] = 0.0 if hi == lo else (imgs[k] - lo) / (hi - lo)
        return out[:, None, :, :]

    def flat_inputs(self, split: str) -> np.ndarray:
        """The same normalized data flattened row-major: (N, 1, side*side)."""
        x = self.cnn_inputs(split)
        return x.reshape(x.shape[0], 1, -1)


def load_dataset(manifest_path) -> Dataset:
    """Read a manifest back, verifying schema and per-file checksums."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DataError(f"manifest missing: {manifest_path}")
    base = manifest_path.parent
    with open(manifest_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != MANIFEST_HEADER:
            raise DataError(
                f"unexpected manifest schema {reader.fieldnames} "
                f"(want {MANIFEST_HEADER})"
            )
        rows = list(reader)
    if not rows:
        raise DataError(f"{manifest_path} lists no samples")

    images = {"train": [], "test": [], "gen": []}
    labels = {"train": [], "test": [], "gen": []}
    ids = {"train": [], "test": [], "gen": []}
    side = None
    for row in rows:
        split = row["split"]
        if split not in images:
            raise DataError(f"unknown split tag {split!r} in manifest")
        img_path = base / row["image_path"]
        if not img_path.exists():
            raise DataError(f"image file missing: {img_path}")
        digest = hashlib.sha256(img_path.read_bytes()).hexdigest()
        if digest != row["checksum_sha256"]:
            raise DataError(f"checksum mismatch for {img_path}")
        img = read_qimg(img_path)
        if side is None:
            side = img.side
        elif side != img.side:
            raise DataError("mixed image sides within one dataset")
        images[split].append(img.pixels)
        labels[split].append(float(row["param_value"]))
        ids[split].append(row["id"])
    return Dataset(
        side,
        {k: np.array(v) if v else np.zeros((0, side, side)) for k, v in images.items()},
        {k: np.array(v) for k, v in labels.items()},
        ids,
    )
